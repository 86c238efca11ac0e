#include "tropigon/trigonal.hpp"

#include "tropigon/error.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

namespace tropigon {

namespace {

struct CanonicalContext {
  Retraction to_can;  // ambient -> canonical
  MetricGraph G0;
  Divisor D0;  // on G0
};

CanonicalContext canonicalize(const MetricGraph& m, const Divisor& d) {
  CanonicalContext ctx;
  ctx.to_can = canonical_model(m);
  ctx.G0 = ctx.to_can.core;
  Divisor eff = d;
  if (!eff.effective()) {
    auto e = make_effective(m, d);
    if (!e) fail_pre("divisor class has no effective representative");
    eff = std::move(*e);
  }
  // reduced divisors live on the core, never on retracted trees
  Point q = lift_point(m, ctx.to_can, Point::at_vertex(0));
  Divisor r = reduce(m, eff, q);
  for (const auto& [p, c] : r.coeff) {
    if (!is_retained(m, ctx.to_can, p))
      fail_internal("reduced divisor has support off the canonical core");
    ctx.D0.add(ctx.to_can.map_point(m, p), c);
  }
  return ctx;
}

// Admissible representative on a graph that is its own canonical model.
Divisor rep_divisor(const MetricGraph& G0, const Divisor& D0, int x) {
  Divisor reduced = reduce(G0, D0, Point::at_vertex(x));
  if (reduced.at(Point::at_vertex(x)) < 1)
    fail_pre("reduced divisor misses its base vertex: the class has rank < 1");
  Divisor resid = reduced;
  resid.add(Point::at_vertex(x), -1);
  resid = smooth_common_edge(G0, resid);
  resid.add(Point::at_vertex(x), 1);
  return resid;
}

std::vector<AdmissibleRep> reps_on_canonical(const MetricGraph& G0, const Divisor& D0) {
  std::vector<AdmissibleRep> reps;
  for (int x = 0; x < G0.g.num_vertices(); ++x) {
    Divisor div = rep_divisor(G0, D0, x);
    bool merged = false;
    for (auto& rep : reps) {
      if (rep.divisor == div) {
        rep.base_vertices.push_back(x);
        merged = true;
        break;
      }
    }
    if (!merged) reps.push_back({{x}, div});
  }
  // disjoint supports across distinct representatives
  for (size_t i = 0; i < reps.size(); ++i)
    for (size_t j = i + 1; j < reps.size(); ++j)
      for (const auto& [p, c] : reps[i].divisor.coeff)
        if (reps[j].divisor.at(p) != 0)
          fail_internal("distinct admissible representatives share support");
  return reps;
}

bool removal_disconnects(const WeightedGraph& g, const std::set<int>& removed) {
  if (g.num_vertices() == 0) return false;
  std::vector<char> seen(g.num_vertices(), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int e = 0; e < g.num_edges(); ++e) {
      if (removed.count(e)) continue;
      const auto& ed = g.edges[e];
      int w = -1;
      if (ed.u == v) w = ed.v;
      else if (ed.v == v) w = ed.u;
      if (w >= 0 && !seen[w]) seen[w] = 1, ++count, q.push(w);
    }
  }
  return count < g.num_vertices();
}

}  // namespace

AdmissibleRep admissible_rep(const MetricGraph& m, const Divisor& d, int x) {
  CanonicalContext ctx = canonicalize(m, d);
  if (edge_connectivity(ctx.G0.g) < 3)
    fail_pre("admissible representatives require a 3-edge connected graph");
  if (ctx.D0.degree() != 3) fail_pre("divisor degree must be 3");
  if (x < 0 || x >= ctx.G0.g.num_vertices()) fail_pre("unknown canonical vertex");
  if (!rank_at_least(ctx.G0, ctx.D0, 1)) fail_pre("divisor has rank < 1");
  AdmissibleRep rep;
  rep.divisor = rep_divisor(ctx.G0, ctx.D0, x);
  for (int v = 0; v < ctx.G0.g.num_vertices(); ++v)
    if (rep_divisor(ctx.G0, ctx.D0, v) == rep.divisor) rep.base_vertices.push_back(v);
  return rep;
}

std::vector<AdmissibleRep> all_admissible_reps(const MetricGraph& m, const Divisor& d) {
  CanonicalContext ctx = canonicalize(m, d);
  if (edge_connectivity(ctx.G0.g) < 3)
    fail_pre("admissible representatives require a 3-edge connected graph");
  if (ctx.D0.degree() != 3) fail_pre("divisor degree must be 3");
  if (!rank_at_least(ctx.G0, ctx.D0, 1)) fail_pre("divisor has rank < 1");
  return reps_on_canonical(ctx.G0, ctx.D0);
}

SupportRefinement support_refinement(const MetricGraph& canonical,
                                     const std::vector<AdmissibleRep>& reps) {
  std::vector<Point> pts;
  for (const auto& rep : reps)
    for (const auto& [p, c] : rep.divisor.coeff) pts.push_back(p);
  SupportRefinement sr;
  sr.gd = refine_at(canonical, pts);
  sr.owner.assign(sr.gd.fine.g.num_vertices(), -1);
  for (size_t i = 0; i < reps.size(); ++i) {
    for (const auto& [p, c] : reps[i].divisor.coeff) {
      Point fp = sr.gd.to_fine(p);
      if (!fp.is_vertex()) fail_internal("support point missing from G_D");
      if (sr.owner[fp.vertex] >= 0 && sr.owner[fp.vertex] != static_cast<int>(i))
        fail_internal("refined vertex claimed by two representatives");
      sr.owner[fp.vertex] = static_cast<int>(i);
    }
  }
  for (int v = 0; v < sr.gd.fine.g.num_vertices(); ++v)
    if (sr.owner[v] < 0)
      fail_internal("refined vertex not covered by any representative");
  return sr;
}

std::optional<ConsecutiveCut> consecutive(const SupportRefinement& sr, int i, int j) {
  if (i == j) fail_pre("consecutive requires two distinct representatives");
  ConsecutiveCut cut;
  for (int e = 0; e < sr.gd.fine.g.num_edges(); ++e) {
    const auto& ed = sr.gd.fine.g.edges[e];
    int ou = sr.owner[ed.u], ov = sr.owner[ed.v];
    if ((ou == i && ov == j) || (ou == j && ov == i)) cut.fine_edges.push_back(e);
  }
  if (cut.fine_edges.empty()) return std::nullopt;
  if (cut.fine_edges.size() != 3)
    fail_internal("consecutive representatives joined by " +
                  std::to_string(cut.fine_edges.size()) + " edges, expected 3");
  cut.length = sr.gd.fine.len(cut.fine_edges[0]);
  for (int e : cut.fine_edges)
    if (sr.gd.fine.len(e) != cut.length)
      fail_internal("connecting edges of consecutive representatives differ in length");
  std::set<int> rem(cut.fine_edges.begin(), cut.fine_edges.end());
  if (!removal_disconnects(sr.gd.fine.g, rem))
    fail_internal("connecting edges do not form an edge cut");
  return cut;
}

// ---------------------------------------------------------------------------
// Cover assembly

namespace {

// A cover of a loop-free canonical model, before loop decoration.
struct CoreCover {
  IndexedMorphism phi;            // source (refinement of core) -> metric tree
  Refinement source_ref;          // core -> source refinement
  std::map<int, Divisor> reps;    // tree vertex -> representative (core coords)
};

Retraction refinement_as_retraction(const Refinement& ref) {
  Retraction r;
  r.core = ref.coarse;
  r.vertex_image.resize(ref.fine.g.num_vertices());
  for (int v = 0; v < ref.fine.g.num_vertices(); ++v)
    r.vertex_image[v] = ref.fine_vertex_origin[v];
  r.edge_image.resize(ref.fine.g.num_edges());
  for (int e = 0; e < ref.fine.g.num_edges(); ++e) {
    const auto& s = ref.fine_edge_span[e];
    r.edge_image[e].path.push_back({s.coarse_edge, s.a, s.b, false});
  }
  return r;
}

void assert_cover_shape(const IndexedMorphism& phi) {
  MorphismReport rep = check_morphism(phi);
  if (!rep.structurally_valid)
    fail_internal("constructed cover is structurally invalid: " +
                  (rep.violations.empty() ? std::string("?") : rep.violations[0]));
  if (!rep.harmonic || !rep.non_degenerate || rep.degree != 3 ||
      !rep.metric_consistent)
    fail_internal("constructed cover is not a non-degenerate harmonic degree-3 morphism");
}

// Main construction for loop-free canonical models on more than three
// vertices: representatives become tree vertices, consecutive pairs tree
// edges, cut edges map with index 1 and everything else is contracted.
CoreCover build_main(const MetricGraph& G0, const Divisor& D0) {
  std::vector<AdmissibleRep> reps = reps_on_canonical(G0, D0);
  SupportRefinement sr = support_refinement(G0, reps);
  int n = static_cast<int>(reps.size());

  MetricGraph tree;
  for (int i = 0; i < n; ++i) tree.g.add_vertex("t" + std::to_string(i), 0);
  std::map<std::pair<int, int>, int> tree_edge_of;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      auto cut = consecutive(sr, i, j);
      if (!cut) continue;
      int te = tree.g.add_edge("t" + std::to_string(i) + "_" + std::to_string(j), i, j);
      tree.length.push_back(cut->length);
      tree_edge_of[{i, j}] = te;
    }
  }
  if (tree.g.num_edges() != n - 1 || !tree.g.connected())
    fail_internal("representative adjacency graph is not a tree");

  IndexedMorphism phi;
  phi.src = sr.gd.fine.g;
  phi.src_len = sr.gd.fine.length;
  phi.tgt = tree.g;
  phi.tgt_len = tree.length;
  phi.vertex_map = sr.owner;
  phi.edge_map.resize(phi.src.num_edges());
  phi.mu.assign(phi.src.num_edges(), 0);
  for (int e = 0; e < phi.src.num_edges(); ++e) {
    const auto& ed = phi.src.edges[e];
    int a = sr.owner[ed.u], b = sr.owner[ed.v];
    if (a == b) {
      phi.edge_map[e] = {-1, a, false};
      continue;
    }
    int i = std::min(a, b), j = std::max(a, b);
    auto it = tree_edge_of.find({i, j});
    if (it == tree_edge_of.end()) fail_internal("cut edge without a tree edge");
    phi.edge_map[e] = {it->second, -1, a != i};
    phi.mu[e] = 1;
  }
  assert_cover_shape(phi);

  CoreCover out;
  out.phi = std::move(phi);
  out.source_ref = sr.gd;
  for (int i = 0; i < n; ++i) out.reps[i] = reps[i].divisor;
  return out;
}

// Small cores (two or three canonical vertices, loop-free): the cover
// groups the edge sets across a vertex split or along a chain; edges
// longer than the fiber length are split and the overhang contracted.
// `must_align` lists (vertex, point) pairs that have to share a tree image
// (loop decoration constraints).
CoreCover build_small_core(const MetricGraph& G0, const Divisor& D0,
                           const std::vector<std::pair<int, Point>>& must_align) {
  int nv = G0.g.num_vertices();
  if (nv != 2 && nv != 3)
    fail_pre("small-core construction needs a canonical model on 2 or 3 vertices");
  for (int e = 0; e < G0.g.num_edges(); ++e)
    if (G0.g.is_loop(e)) fail_pre("small-core construction expects a loop-free model");

  // Candidate fiber plans: a list of tree edges; each tree edge carries the
  // three core edges in its fiber together with the end (vertex) the kept
  // piece hangs from. Vertex images are forced afterwards.
  struct Plan {
    int tree_vertices;
    std::vector<int> vmap;                       // core vertex -> tree vertex
    std::vector<std::pair<int, int>> tree_ends;  // per tree edge
    std::vector<std::vector<std::pair<int, int>>> fibers;  // (core edge, from vertex)
  };
  std::vector<Plan> plans;

  auto edges_between = [&](int a, int b) {
    std::vector<int> out;
    for (int e = 0; e < G0.g.num_edges(); ++e) {
      const auto& ed = G0.g.edges[e];
      if ((ed.u == a && ed.v == b) || (ed.u == b && ed.v == a)) out.push_back(e);
    }
    return out;
  };

  // split plans: {x} against the rest
  for (int x = 0; x < nv; ++x) {
    std::vector<int> cross;
    for (int e = 0; e < G0.g.num_edges(); ++e) {
      const auto& ed = G0.g.edges[e];
      if ((ed.u == x) != (ed.v == x)) cross.push_back(e);
    }
    if (cross.size() != 3) continue;
    Plan plan;
    plan.tree_vertices = 2;
    plan.vmap.assign(nv, 1);
    plan.vmap[x] = 0;
    plan.tree_ends.push_back({0, 1});
    std::vector<std::pair<int, int>> fiber;
    for (int e : cross) fiber.push_back({e, x});
    plan.fibers.push_back(fiber);
    plans.push_back(plan);
  }
  // chain plans for three vertices: u - w - z with no direct u-z edges
  if (nv == 3) {
    for (int w = 0; w < 3; ++w) {
      int u = (w + 1) % 3, z = (w + 2) % 3;
      if (!edges_between(u, z).empty()) continue;
      auto cuw = edges_between(u, w), cwz = edges_between(w, z);
      if (cuw.size() != 3 || cwz.size() != 3) continue;
      for (int side1 = 0; side1 < 2; ++side1) {
        for (int side2 = 0; side2 < 2; ++side2) {
          Plan plan;
          plan.tree_vertices = 3;
          plan.vmap.assign(3, 0);
          plan.vmap[u] = 0;
          plan.vmap[w] = 1;
          plan.vmap[z] = 2;
          plan.tree_ends.push_back({0, 1});
          plan.tree_ends.push_back({1, 2});
          std::vector<std::pair<int, int>> f1, f2;
          for (int e : cuw) f1.push_back({e, side1 == 0 ? u : w});
          for (int e : cwz) f2.push_back({e, side2 == 0 ? z : w});
          plan.fibers.push_back(f1);
          plan.fibers.push_back(f2);
          plans.push_back(plan);
        }
      }
    }
  }

  std::string last_error = "no candidate fiber plan";
  for (const Plan& plan : plans) {
    // fiber length = shortest member; longer edges are split at that
    // length from their anchor vertex
    std::vector<Rat> fiber_len;
    for (const auto& fiber : plan.fibers) {
      Rat l = G0.len(fiber[0].first);
      for (const auto& [e, from] : fiber) l = std::min(l, G0.len(e));
      fiber_len.push_back(l);
    }
    std::vector<Point> cuts;
    for (size_t f = 0; f < plan.fibers.size(); ++f) {
      for (const auto& [e, from] : plan.fibers[f]) {
        if (G0.len(e) == fiber_len[f]) continue;
        Rat off = (G0.g.edges[e].u == from) ? fiber_len[f] : G0.len(e) - fiber_len[f];
        cuts.push_back(Point::on_edge(G0, e, off));
      }
    }
    for (const auto& [v, p] : must_align) {
      (void)v;
      if (!p.is_vertex()) cuts.push_back(p);
    }
    Refinement ref = refine_at(G0, cuts);

    MetricGraph tree;
    for (int t = 0; t < plan.tree_vertices; ++t)
      tree.g.add_vertex("t" + std::to_string(t), 0);
    for (size_t f = 0; f < plan.fibers.size(); ++f) {
      tree.g.add_edge("te" + std::to_string(f), plan.tree_ends[f].first,
                      plan.tree_ends[f].second);
      tree.length.push_back(fiber_len[f]);
    }

    IndexedMorphism phi;
    phi.src = ref.fine.g;
    phi.src_len = ref.fine.length;
    phi.tgt = tree.g;
    phi.tgt_len = tree.length;
    phi.vertex_map.assign(phi.src.num_vertices(), -1);
    phi.edge_map.assign(phi.src.num_edges(), {});
    phi.mu.assign(phi.src.num_edges(), 0);

    // horizontal pieces: the anchored prefix of each fiber edge
    std::vector<char> horizontal(phi.src.num_edges(), 0);
    bool ok = true;
    for (size_t f = 0; f < plan.fibers.size() && ok; ++f) {
      for (const auto& [e, from] : plan.fibers[f]) {
        // the piece of e of length fiber_len[f] anchored at `from`
        int piece = -1;
        for (int fe : ref.pieces[e]) {
          const auto& span = ref.fine_edge_span[fe];
          bool at_start = span.a == 0 && G0.g.edges[e].u == from;
          bool at_end = span.b == G0.len(e) && G0.g.edges[e].v == from;
          if ((at_start || at_end) && span.b - span.a == fiber_len[f]) piece = fe;
        }
        if (piece < 0) {
          ok = false;
          break;
        }
        horizontal[piece] = 1;
        // orient: the anchor maps to the anchor-side tree vertex
        const auto& fed = phi.src.edges[piece];
        int anchor_fine = -1;
        for (int cand : {fed.u, fed.v})
          if (ref.fine_vertex_origin[cand] == Point::at_vertex(from)) anchor_fine = cand;
        if (anchor_fine < 0) {
          ok = false;
          break;
        }
        int ta = plan.vmap[from];
        int tb = plan.tree_ends[f].first == ta ? plan.tree_ends[f].second
                                               : plan.tree_ends[f].first;
        phi.vertex_map[anchor_fine] = ta;
        int other_fine = fed.u == anchor_fine ? fed.v : fed.u;
        phi.vertex_map[other_fine] = tb;
        bool flip = fed.u != anchor_fine;
        if (tree.g.edges[f].u != ta) flip = !flip;
        phi.edge_map[piece] = {static_cast<int>(f), -1, flip};
        phi.mu[piece] = 1;
      }
    }
    if (!ok) continue;
    // remaining vertices inherit the plan image; overhang pieces and
    // in-side edges are contracted there
    for (int v = 0; v < phi.src.num_vertices(); ++v) {
      if (phi.vertex_map[v] >= 0) continue;
      Point origin = ref.fine_vertex_origin[v];
      if (origin.is_vertex()) {
        phi.vertex_map[v] = plan.vmap[origin.vertex];
      } else {
        // refinement point that is not a fiber end: sits in an overhang;
        // image forced by contraction below. Use the far-end image of its
        // coarse edge (both endpoints of the overhang share it when the
        // plan is consistent; check_morphism rejects it otherwise).
        phi.vertex_map[v] = -1;
      }
    }
    // propagate images across contracted pieces until stable
    for (int round = 0; round < phi.src.num_vertices() + 2; ++round) {
      for (int e = 0; e < phi.src.num_edges(); ++e) {
        if (horizontal[e]) continue;
        int a = phi.src.edges[e].u, b = phi.src.edges[e].v;
        if (phi.vertex_map[a] >= 0 && phi.vertex_map[b] < 0)
          phi.vertex_map[b] = phi.vertex_map[a];
        if (phi.vertex_map[b] >= 0 && phi.vertex_map[a] < 0)
          phi.vertex_map[a] = phi.vertex_map[b];
      }
    }
    if (std::any_of(phi.vertex_map.begin(), phi.vertex_map.end(),
                    [](int t) { return t < 0; }))
      continue;
    for (int e = 0; e < phi.src.num_edges(); ++e) {
      if (horizontal[e]) continue;
      int a = phi.vertex_map[phi.src.edges[e].u];
      int b = phi.vertex_map[phi.src.edges[e].v];
      if (a != b) {
        ok = false;
        break;
      }
      phi.edge_map[e] = {-1, a, false};
      phi.mu[e] = 0;
    }
    if (!ok) continue;

    MorphismReport rep = check_morphism(phi);
    if (!rep.structurally_valid || !rep.harmonic || !rep.non_degenerate ||
        rep.degree != 3 || !rep.metric_consistent) {
      last_error = "candidate plan fails harmonicity";
      continue;
    }
    // loop-decoration alignment
    bool aligned = true;
    for (const auto& [v, p] : must_align) {
      Point img_v = Point::at_vertex(phi.vertex_map[v]);
      Point fp = ref.to_fine(p);
      Point img_p = fp.is_vertex() ? Point::at_vertex(phi.vertex_map[fp.vertex])
                                   : phi.map_point(fp);
      if (!(img_v == img_p)) {
        aligned = false;
        break;
      }
    }
    if (!aligned) {
      last_error = "no plan aligns the loop decorations";
      continue;
    }

    CoreCover out;
    out.phi = std::move(phi);
    out.source_ref = ref;
    return out;
  }
  fail_structure("metric graph outside the small-core cover families: " + last_error);
}

// Strip the loop edges off a canonical model.
struct LoopFree {
  MetricGraph core;            // same vertices, loop edges removed
  std::vector<int> edge_to_G0; // core edge -> canonical edge
  std::vector<int> loops;      // canonical loop edges
};

LoopFree strip_loops(const MetricGraph& G0) {
  LoopFree lf;
  lf.core.g.vertices = G0.g.vertices;
  for (int e = 0; e < G0.g.num_edges(); ++e) {
    if (G0.g.is_loop(e)) {
      lf.loops.push_back(e);
      continue;
    }
    lf.core.g.add_edge(G0.g.edges[e].id, G0.g.edges[e].u, G0.g.edges[e].v);
    lf.core.length.push_back(G0.len(e));
    lf.edge_to_G0.push_back(e);
  }
  return lf;
}

Divisor to_loop_free(const LoopFree& lf, const MetricGraph& G0, const Divisor& d) {
  Divisor out;
  std::vector<int> inverse(G0.g.num_edges(), -1);
  for (size_t i = 0; i < lf.edge_to_G0.size(); ++i) inverse[lf.edge_to_G0[i]] = i;
  for (const auto& [p, c] : d.coeff) {
    if (p.is_vertex()) {
      out.add(p, c);
    } else {
      if (inverse[p.edge] < 0)
        fail_internal("divisor support on a loop cannot move to the loop-free core");
      Point q;
      q.edge = inverse[p.edge];
      q.offset = p.offset;
      out.add(q, c);
    }
  }
  return out;
}

Point loop_free_point_to_G0(const LoopFree& lf, const Point& p) {
  if (p.is_vertex()) return p;
  Point q;
  q.edge = lf.edge_to_G0[p.edge];
  q.offset = p.offset;
  return q;
}

// Builds the final cover from a core cover plus one decoration per loop.
TrigonalCover decorate_loops(const CanonicalContext& ctx, const LoopFree& lf,
                             CoreCover core,
                             const std::vector<std::pair<int, Point>>& loop_anchor) {
  // loop_anchor[i]: for lf.loops[i], the pair (x = loop vertex, y = leaf base)
  IndexedMorphism phi = core.phi;

  // retraction of the assembled source onto G0
  Retraction r;
  r.core = ctx.G0;
  r.vertex_image.resize(phi.src.num_vertices());
  for (int v = 0; v < phi.src.num_vertices(); ++v)
    r.vertex_image[v] =
        loop_free_point_to_G0(lf, core.source_ref.fine_vertex_origin[v]);
  r.edge_image.resize(phi.src.num_edges());
  for (int e = 0; e < phi.src.num_edges(); ++e) {
    const auto& span = core.source_ref.fine_edge_span[e];
    r.edge_image[e].path.push_back(
        {lf.edge_to_G0[span.coarse_edge], span.a, span.b, false});
  }

  for (size_t i = 0; i < lf.loops.size(); ++i) {
    int loop_edge = lf.loops[i];
    auto [x, y] = loop_anchor[i];
    Rat half = ctx.G0.len(loop_edge) / 2;
    std::string base = ctx.G0.g.edges[loop_edge].id;

    Point fy = core.source_ref.to_fine(y);
    if (!fy.is_vertex())
      fail_internal("loop leaf base is not a vertex of the refined core");
    int tau = phi.vertex_map[x];
    if (phi.vertex_map[fy.vertex] != tau)
      fail_internal("loop leaf base maps away from the loop vertex fiber");

    int tip_t = phi.tgt.add_vertex(base + ".t", 0);
    int te = phi.tgt.add_edge(base + ".leaf", tau, tip_t);
    phi.tgt_len->push_back(half);

    int w = phi.src.add_vertex(base + ".mid", 0);
    phi.vertex_map.push_back(tip_t);
    r.vertex_image.push_back(Point::on_edge(ctx.G0, loop_edge, half));
    int h1 = phi.src.add_edge(base + ".a", x, w);
    phi.src_len->push_back(half);
    phi.edge_map.push_back({te, -1, false});
    phi.mu.push_back(1);
    r.edge_image.push_back({});
    r.edge_image[h1].path.push_back({loop_edge, Rat(0), half, false});
    int h2 = phi.src.add_edge(base + ".b", w, x);
    phi.src_len->push_back(half);
    phi.edge_map.push_back({te, -1, true});
    phi.mu.push_back(1);
    r.edge_image.push_back({});
    r.edge_image[h2].path.push_back({loop_edge, half, ctx.G0.len(loop_edge), true});

    int tip = phi.src.add_vertex(base + ".tip", 0);
    phi.vertex_map.push_back(tip_t);
    Point y0 = loop_free_point_to_G0(lf, y);
    r.vertex_image.push_back(y0);
    int le = phi.src.add_edge(base + ".le", fy.vertex, tip);
    phi.src_len->push_back(half);
    phi.edge_map.push_back({te, -1, false});
    phi.mu.push_back(1);
    r.edge_image.push_back({});
    r.edge_image[le].collapsed = true;
    r.edge_image[le].target = y0;
  }

  assert_cover_shape(phi);
  TrigonalCover cover;
  cover.canonical = ctx.G0;
  cover.input_to_canonical = ctx.to_can;
  cover.phi = std::move(phi);
  cover.source_to_canonical = std::move(r);
  for (const auto& [t, div] : core.reps) {
    Divisor on_G0;
    for (const auto& [p, c] : div.coeff) on_G0.add(loop_free_point_to_G0(lf, p), c);
    cover.rep_of_tree_vertex[t] = on_G0;
  }
  return cover;
}

TrigonalCover build_from_context(const CanonicalContext& ctx) {
  if (edge_connectivity(ctx.G0.g) < 3)
    fail_pre("the construction requires a 3-edge connected canonical model");
  if (ctx.D0.degree() != 3) fail_pre("divisor degree must be 3");
  if (!rank_at_least(ctx.G0, ctx.D0, 1)) fail_pre("divisor has rank < 1");

  LoopFree lf = strip_loops(ctx.G0);
  std::vector<std::pair<int, Point>> anchors;
  Divisor Dc;
  if (lf.loops.empty()) {
    Dc = to_loop_free(lf, ctx.G0, ctx.D0);
  } else {
    // a representative supported away from the loops
    Divisor d_off = rep_divisor(ctx.G0, ctx.D0, 0);
    for (const auto& [p, c] : d_off.coeff)
      if (!p.is_vertex() && ctx.G0.g.is_loop(p.edge))
        fail_internal("admissible representative touches a loop interior");
    Dc = to_loop_free(lf, ctx.G0, d_off);
    if (!rank_at_least(lf.core, Dc, 1))
      fail_internal("loop-free core lost the rank of the divisor");
    for (int loop_edge : lf.loops) {
      int x = ctx.G0.g.edges[loop_edge].u;
      Divisor rx = rep_divisor(lf.core, Dc, x);
      if (rx.at(Point::at_vertex(x)) < 2)
        fail_structure("no representative of the form 2x + y at a loop vertex");
      Divisor rest = rx;
      rest.add(Point::at_vertex(x), -2);
      if (rest.degree() != 1 || !rest.effective())
        fail_internal("loop representative residue is not a single point");
      anchors.push_back({x, rest.support().front()});
    }
  }
  for (int v = 0; v < lf.core.g.num_vertices(); ++v)
    if (lf.core.g.valence(v) < 3)
      fail_internal("loop-free core of a 3-edge connected model lost canonicity");

  std::vector<std::pair<int, Point>> align;
  for (const auto& [x, y] : anchors)
    align.push_back({x, y});

  CoreCover core;
  if (lf.core.g.num_vertices() > 3) {
    core = build_main(lf.core, Dc);
    // alignment is automatic: x and y lie in one representative support
  } else {
    core = build_small_core(lf.core, Dc, align);
  }
  return decorate_loops(ctx, lf, std::move(core), anchors);
}

}  // namespace

TrigonalCover build_trigonal_cover(const MetricGraph& m, const Divisor& d) {
  CanonicalContext ctx = canonicalize(m, d);
  for (int e = 0; e < ctx.G0.g.num_edges(); ++e)
    if (ctx.G0.g.is_loop(e))
      fail_pre("canonical model has loops; use build_trigonal_cover_with_loops");
  return build_from_context(ctx);
}

TrigonalCover build_trigonal_cover_with_loops(const MetricGraph& m, const Divisor& d) {
  return build_from_context(canonicalize(m, d));
}

SmallCaseCertificate small_case_witness(const MetricGraph& m) {
  Retraction can = canonical_loopless_model(m);
  int n = can.core.g.num_vertices();
  if (n != 2 && n != 3)
    fail_pre("small-case witness requires a canonical loopless model on 2 or 3 vertices");
  std::vector<Point> vs;
  for (int v = 0; v < n; ++v) vs.push_back(lift_point(m, can, Point::at_vertex(v)));
  std::vector<Divisor> candidates;
  if (n == 2) {
    for (int two_at : {1, 0}) {
      Divisor d;
      d.add(vs[two_at], 2);
      d.add(vs[1 - two_at], 1);
      candidates.push_back(d);
    }
  } else {
    Divisor d;
    for (const Point& p : vs) d.add(p, 1);
    candidates.push_back(d);
  }
  for (const Divisor& d : candidates)
    if (rank_at_least(m, d, 1)) return {n, d};
  fail_internal("small-case witness fails its rank check");
}

TrigonalCover small_core_cover(const MetricGraph& m, const Divisor& d) {
  CanonicalContext ctx = canonicalize(m, d);
  if (edge_connectivity(ctx.G0.g) < 3)
    fail_pre("small-core cover requires a 3-edge connected graph");
  LoopFree lf = strip_loops(ctx.G0);
  if (lf.core.g.num_vertices() > 3)
    fail_pre("small-core cover requires a loop-free core on 2 or 3 vertices");
  Divisor Dc = lf.loops.empty() ? to_loop_free(lf, ctx.G0, ctx.D0)
                                : to_loop_free(lf, ctx.G0, rep_divisor(ctx.G0, ctx.D0, 0));
  if (!rank_at_least(lf.core, Dc, 1))
    fail_pre("divisor has rank < 1 on the loop-free core");
  CoreCover core = build_small_core(lf.core, Dc, {});
  TrigonalCover cover;
  cover.canonical = lf.core;
  cover.phi = std::move(core.phi);
  cover.source_to_canonical = refinement_as_retraction(core.source_ref);
  return cover;
}

RoundtripReport verify_equivalence_roundtrip(const MetricGraph& m, const Divisor& d) {
  RoundtripReport rep;
  auto check = [&](bool ok, const std::string& what) {
    if (ok) rep.checks.push_back(what);
    else rep.failures.push_back(what);
    return ok;
  };

  TrigonalCover cover = build_trigonal_cover_with_loops(m, d);
  MorphismReport mr = check_morphism(cover.phi);
  check(mr.structurally_valid && mr.harmonic && mr.non_degenerate &&
            mr.degree == 3 && mr.metric_consistent,
        "cover is a metric non-degenerate harmonic morphism of degree 3");

  MetricGraph src = cover.phi.source_metric();
  bool fibers_ok = true;
  for (int te = 0; te < cover.phi.tgt.num_edges(); ++te) {
    std::vector<int> fiber;
    for (int e = 0; e < cover.phi.src.num_edges(); ++e)
      if (!cover.phi.edge_map[e].contracted() && cover.phi.edge_map[e].edge == te)
        fiber.push_back(e);
    if (fiber.size() != 3) fibers_ok = false;
    for (int e : fiber)
      if ((*cover.phi.src_len)[e] != (*cover.phi.tgt_len)[te]) fibers_ok = false;
    if (!removal_disconnects(cover.phi.src, std::set<int>(fiber.begin(), fiber.end())))
      fibers_ok = false;
  }
  check(fibers_ok, "every tree edge has a disconnecting fiber of 3 equal-length edges");

  // generic point of the tree: the midpoint of the first edge
  MetricGraph tree = cover.phi.target_metric();
  Point generic;
  generic.edge = 0;
  generic.offset = tree.len(0) / 2;
  Divisor generic_div;
  generic_div.add(generic, 1);
  Divisor pulled = pullback(cover.phi, generic_div);
  check(pulled.degree() == 3, "pullback of a generic tree point has degree 3");
  check(rank_at_least(src, pulled, 1),
        "pullback of a generic tree point has rank >= 1 on the modified graph");

  Divisor on_G0;
  for (const auto& [p, c] : pulled.coeff)
    on_G0.add(cover.source_to_canonical.map_point(src, p), c);
  check(rank_at_least(cover.canonical, on_G0, 1),
        "retraction of the pullback has rank >= 1 on the canonical model");
  if (cover.input_to_canonical) {
    Divisor on_m;
    for (const auto& [p, c] : on_G0.coeff)
      on_m.add(lift_point(m, *cover.input_to_canonical, p), c);
    check(rank_at_least(m, on_m, 1),
          "retraction of the pullback has rank >= 1 on the input graph");
  }

  bool reps_match = true;
  for (const auto& [t, div] : cover.rep_of_tree_vertex) {
    Divisor vertex_div;
    vertex_div.add(Point::at_vertex(t), 1);
    Divisor fiber_div = pullback(cover.phi, vertex_div);
    Divisor pushed;
    for (const auto& [p, c] : fiber_div.coeff)
      pushed.add(cover.source_to_canonical.map_point(src, p), c);
    if (!(pushed == div)) reps_match = false;
  }
  check(reps_match, "pullbacks of tree vertices equal the admissible representatives");

  rep.pass = rep.failures.empty();
  return rep;
}

}  // namespace tropigon
