#include "tropigon/metric.hpp"

#include "tropigon/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>

namespace tropigon {

void MetricGraph::validate() const {
  g.validate();
  if (static_cast<int>(length.size()) != g.num_edges())
    fail_structure("length vector does not match edge count");
  for (const Rat& l : length)
    if (l <= 0) fail_structure("non-positive edge length");
}

Point Point::on_edge(const MetricGraph& m, int e, const Rat& off) {
  if (e < 0 || e >= m.g.num_edges()) fail_pre("point on unknown edge");
  if (off < 0 || off > m.len(e)) fail_pre("point offset outside edge");
  if (off == 0) return at_vertex(m.g.edges[e].u);
  if (off == m.len(e)) return at_vertex(m.g.edges[e].v);
  Point p;
  p.edge = e;
  p.offset = off;
  return p;
}

std::string point_to_string(const MetricGraph& m, const Point& p) {
  if (p.is_vertex()) return "v:" + m.g.vertices[p.vertex].id;
  return "e:" + m.g.edges[p.edge].id + "@" + rat_to_string(p.offset);
}

int genus(const MetricGraph& m) { return genus(m.g); }

// ---------------------------------------------------------------------------
// Refinement

Refinement refine_at(const MetricGraph& m, std::vector<Point> pts) {
  Refinement r;
  r.coarse = m;
  r.fine.g.vertices = m.g.vertices;
  r.fine_vertex_origin.resize(m.g.num_vertices());
  for (int v = 0; v < m.g.num_vertices(); ++v)
    r.fine_vertex_origin[v] = Point::at_vertex(v);

  std::vector<std::vector<Rat>> cut(m.g.num_edges());
  for (const Point& p : pts) {
    if (p.is_vertex()) continue;
    cut[p.edge].push_back(p.offset);
  }
  r.pieces.resize(m.g.num_edges());
  for (int e = 0; e < m.g.num_edges(); ++e) {
    auto& offs = cut[e];
    std::sort(offs.begin(), offs.end());
    offs.erase(std::unique(offs.begin(), offs.end()), offs.end());
    const auto& ed = m.g.edges[e];
    int prev_v = ed.u;
    Rat prev_off = 0;
    std::vector<int> mids;
    for (const Rat& o : offs) {
      int nv = r.fine.g.add_vertex(ed.id + "@" + rat_to_string(o), 0);
      Point orig;
      orig.edge = e;
      orig.offset = o;
      r.fine_vertex_origin.push_back(orig);
      mids.push_back(nv);
    }
    for (size_t i = 0; i <= offs.size(); ++i) {
      int a = (i == 0) ? prev_v : mids[i - 1];
      int b = (i == offs.size()) ? ed.v : mids[i];
      Rat lo = (i == 0) ? Rat(0) : offs[i - 1];
      Rat hi = (i == offs.size()) ? m.len(e) : offs[i];
      std::string id = offs.empty() ? ed.id
                                    : ed.id + "#" + std::to_string(i);
      int ne = r.fine.g.add_edge(id, a, b);
      r.fine.length.push_back(hi - lo);
      r.fine_edge_span.push_back({e, lo, hi});
      r.pieces[e].push_back(ne);
    }
    (void)prev_off;
  }
  return r;
}

Point Refinement::to_fine(const Point& c) const {
  if (c.is_vertex()) return Point::at_vertex(c.vertex);
  for (int fe : pieces[c.edge]) {
    const Span& s = fine_edge_span[fe];
    if (c.offset >= s.a && c.offset <= s.b) {
      Rat local = c.offset - s.a;
      return Point::on_edge(fine, fe, local);
    }
  }
  fail_internal("coarse point not covered by refinement pieces");
}

Point Refinement::to_coarse(const Point& f) const {
  if (f.is_vertex()) {
    return fine_vertex_origin[f.vertex];
  }
  const Span& s = fine_edge_span[f.edge];
  Point p;
  p.edge = s.coarse_edge;
  p.offset = s.a + f.offset;
  // interior of a fine edge is interior of the coarse edge
  return p;
}

// ---------------------------------------------------------------------------
// Retraction and canonical models

Point Retraction::map_point(const MetricGraph& ambient, const Point& p) const {
  if (p.is_vertex()) return vertex_image[p.vertex];
  const EdgeImage& im = edge_image[p.edge];
  if (im.collapsed) return im.target;
  Rat t = p.offset;
  for (const Seg& s : im.path) {
    Rat seg_len = s.b - s.a;
    if (t <= seg_len) {
      Rat off = s.flipped ? s.b - t : s.a + t;
      return Point::on_edge(core, s.core_edge, off);
    }
    t -= seg_len;
  }
  (void)ambient;
  fail_internal("retraction path shorter than ambient edge");
}

Point lift_point(const MetricGraph& ambient, const Retraction& ret,
                 const Point& core_pt) {
  if (core_pt.is_vertex()) {
    // prefer retained preimages: removed-tree vertices share their image
    // with the attachment point
    for (int v = 0; v < ambient.g.num_vertices(); ++v)
      if (ret.vertex_image[v] == core_pt &&
          is_retained(ambient, ret, Point::at_vertex(v)))
        return Point::at_vertex(v);
    // a core vertex can also sit at a seam of an ambient edge path
  }
  for (int e = 0; e < ambient.g.num_edges(); ++e) {
    const auto& im = ret.edge_image[e];
    if (im.collapsed) continue;
    Rat walked = 0;
    for (const auto& seg : im.path) {
      bool hit = false;
      Rat local;  // offset within the segment, in ambient direction
      if (core_pt.is_vertex()) {
        int cv = core_pt.vertex;
        const auto& ce = ret.core.g.edges[seg.core_edge];
        if (ce.u == cv && seg.a == 0) {
          hit = true;
          local = seg.flipped ? seg.b - seg.a : Rat(0);
        } else if (ce.v == cv && seg.b == ret.core.len(seg.core_edge)) {
          hit = true;
          local = seg.flipped ? Rat(0) : seg.b - seg.a;
        }
      } else if (core_pt.edge == seg.core_edge && core_pt.offset >= seg.a &&
                 core_pt.offset <= seg.b) {
        hit = true;
        local = seg.flipped ? seg.b - core_pt.offset : core_pt.offset - seg.a;
      }
      if (hit) {
        return Point::on_edge(ambient, e, walked + local);
      }
      walked += seg.b - seg.a;
    }
  }
  fail_internal("core point has no preimage under the retraction");
}

bool is_retained(const MetricGraph& ambient, const Retraction& ret, const Point& p) {
  if (!p.is_vertex()) return !ret.edge_image[p.edge].collapsed;
  // A vertex is retained unless every incident edge retracts away; the
  // attachment vertex of a removed tree keeps at least one surviving edge.
  bool any_edge = false;
  for (int e : ambient.g.ends_at(p.vertex)) {
    any_edge = true;
    if (!ret.edge_image[e].collapsed) return true;
  }
  return !any_edge;
}

namespace {

Retraction identity_retraction(const MetricGraph& m) {
  Retraction r;
  r.core = m;
  r.vertex_image.resize(m.g.num_vertices());
  for (int v = 0; v < m.g.num_vertices(); ++v)
    r.vertex_image[v] = Point::at_vertex(v);
  r.edge_image.resize(m.g.num_edges());
  for (int e = 0; e < m.g.num_edges(); ++e) {
    Retraction::EdgeImage im;
    im.path.push_back({e, Rat(0), m.len(e), false});
    r.edge_image[e] = im;
  }
  return r;
}

// Composes `outer` (core of acc -> core of outer) onto acc.
void compose(Retraction& acc, const Retraction& outer) {
  for (Point& vp : acc.vertex_image) vp = outer.map_point(acc.core, vp);
  for (auto& im : acc.edge_image) {
    if (im.collapsed) {
      im.target = outer.map_point(acc.core, im.target);
      continue;
    }
    std::vector<Retraction::Seg> np;
    bool all_collapsed = true;
    Point collapse_target;
    for (const auto& seg : im.path) {
      const auto& oim = outer.edge_image[seg.core_edge];
      if (oim.collapsed) {
        collapse_target = oim.target;
        continue;
      }
      all_collapsed = false;
      // restrict the outer path of seg.core_edge to [seg.a, seg.b]
      Rat pos = 0;
      std::vector<Retraction::Seg> restricted;
      for (const auto& os : oim.path) {
        Rat len = os.b - os.a;
        Rat lo = std::max(seg.a, pos), hi = std::min(seg.b, pos + len);
        if (lo < hi) {
          Rat la = lo - pos, lb = hi - pos;  // within os, along ambient dir
          Retraction::Seg ns;
          ns.core_edge = os.core_edge;
          if (!os.flipped) {
            ns.a = os.a + la;
            ns.b = os.a + lb;
            ns.flipped = false;
          } else {
            ns.a = os.b - lb;
            ns.b = os.b - la;
            ns.flipped = true;
          }
          restricted.push_back(ns);
        }
        pos += len;
      }
      if (seg.flipped) {
        std::reverse(restricted.begin(), restricted.end());
        for (auto& s : restricted) s.flipped = !s.flipped;
      }
      np.insert(np.end(), restricted.begin(), restricted.end());
    }
    if (all_collapsed) {
      im.collapsed = true;
      im.target = collapse_target;
      im.path.clear();
    } else {
      im.path = std::move(np);
    }
  }
  acc.core = outer.core;
}

// One elementary simplification step on `cur`; returns the step retraction,
// or nullopt when cur is already canonical.
std::optional<Retraction> canonical_step(const MetricGraph& cur) {
  // leaf removal first
  for (int v = 0; v < cur.g.num_vertices(); ++v) {
    if (cur.g.valence(v) != 1) continue;
    int e = cur.g.ends_at(v).front();
    int w = cur.g.other_end(e, v);
    Retraction r;
    r.core.g.vertices = cur.g.vertices;
    r.core.g.vertices.erase(r.core.g.vertices.begin() + v);
    auto nv = [&](int x) { return x < v ? x : x - 1; };
    std::vector<int> emap(cur.g.num_edges(), -1);
    for (int i = 0; i < cur.g.num_edges(); ++i) {
      if (i == e) continue;
      const auto& ed = cur.g.edges[i];
      emap[i] = r.core.g.add_edge(ed.id, nv(ed.u), nv(ed.v));
      r.core.length.push_back(cur.len(i));
    }
    r.vertex_image.resize(cur.g.num_vertices());
    for (int x = 0; x < cur.g.num_vertices(); ++x)
      r.vertex_image[x] = Point::at_vertex(nv(x == v ? w : x));
    r.edge_image.resize(cur.g.num_edges());
    for (int i = 0; i < cur.g.num_edges(); ++i) {
      if (i == e) {
        r.edge_image[i].collapsed = true;
        r.edge_image[i].target = Point::at_vertex(nv(w));
      } else {
        r.edge_image[i].path.push_back({emap[i], Rat(0), cur.len(i), false});
      }
    }
    return r;
  }
  // valence-2 suppression
  for (int v = 0; v < cur.g.num_vertices(); ++v) {
    if (cur.g.valence(v) != 2) continue;
    auto ends = cur.g.ends_at(v);
    int e1 = ends[0], e2 = ends[1];
    if (e1 == e2) fail_internal("isolated circle in canonical_model input");
    int a = cur.g.other_end(e1, v);
    int b = cur.g.other_end(e2, v);
    Rat l1 = cur.len(e1), l2 = cur.len(e2);
    Retraction r;
    r.core.g.vertices = cur.g.vertices;
    r.core.g.vertices.erase(r.core.g.vertices.begin() + v);
    auto nv = [&](int x) { return x < v ? x : x - 1; };
    std::vector<int> emap(cur.g.num_edges(), -1);
    int merged = -1;
    for (int i = 0; i < cur.g.num_edges(); ++i) {
      if (i == e1) {
        merged = r.core.g.add_edge(cur.g.edges[e1].id, nv(a), nv(b));
        r.core.length.push_back(l1 + l2);
        emap[i] = merged;
      } else if (i == e2) {
        // folded into `merged`
      } else {
        const auto& ed = cur.g.edges[i];
        emap[i] = r.core.g.add_edge(ed.id, nv(ed.u), nv(ed.v));
        r.core.length.push_back(cur.len(i));
      }
    }
    r.vertex_image.resize(cur.g.num_vertices());
    for (int x = 0; x < cur.g.num_vertices(); ++x) {
      if (x == v) {
        Point p;
        p.edge = merged;
        p.offset = l1;
        r.vertex_image[x] = p;
      } else {
        r.vertex_image[x] = Point::at_vertex(nv(x));
      }
    }
    r.edge_image.resize(cur.g.num_edges());
    for (int i = 0; i < cur.g.num_edges(); ++i) {
      if (i == e1) {
        // e1 covers [0, l1] of merged; first end of merged is a
        bool flip = cur.g.edges[e1].u == v;  // e1 runs v -> a
        r.edge_image[i].path.push_back({merged, Rat(0), l1, flip});
      } else if (i == e2) {
        bool flip = cur.g.edges[e2].v == v;  // e2 runs b -> v
        r.edge_image[i].path.push_back({merged, l1, l1 + l2, flip});
      } else {
        r.edge_image[i].path.push_back({emap[i], Rat(0), cur.len(i), false});
      }
    }
    return r;
  }
  return std::nullopt;
}

}  // namespace

Retraction canonical_model(const MetricGraph& m) {
  if (genus(m) < 2) fail_pre("canonical model requires genus >= 2");
  Retraction acc = identity_retraction(m);
  for (;;) {
    auto step = canonical_step(acc.core);
    if (!step) break;
    compose(acc, *step);
  }
  return acc;
}

Retraction canonical_loopless_model(const MetricGraph& m) {
  Retraction acc = canonical_model(m);
  std::vector<Point> midpoints;
  for (int e = 0; e < acc.core.g.num_edges(); ++e) {
    if (acc.core.g.is_loop(e)) {
      Point p;
      p.edge = e;
      p.offset = acc.core.len(e) / 2;
      midpoints.push_back(p);
    }
  }
  if (midpoints.empty()) return acc;
  Refinement ref = refine_at(acc.core, midpoints);
  // view the refinement as a retraction step (a bijective one)
  Retraction step;
  step.core = ref.fine;
  step.vertex_image.resize(acc.core.g.num_vertices());
  for (int v = 0; v < acc.core.g.num_vertices(); ++v)
    step.vertex_image[v] = Point::at_vertex(v);
  step.edge_image.resize(acc.core.g.num_edges());
  for (int e = 0; e < acc.core.g.num_edges(); ++e) {
    for (int fe : ref.pieces[e]) {
      const auto& s = ref.fine_edge_span[fe];
      step.edge_image[e].path.push_back({fe, Rat(0), s.b - s.a, false});
    }
  }
  compose(acc, step);
  return acc;
}

// ---------------------------------------------------------------------------

Rat distance(const MetricGraph& m, const Point& a, const Point& b) {
  Refinement ref = refine_at(m, {a, b});
  Point fa = ref.to_fine(a), fb = ref.to_fine(b);
  int s = fa.vertex, t = fb.vertex;
  if (s < 0 || t < 0) fail_internal("refined endpoints are not vertices");
  int n = ref.fine.g.num_vertices();
  std::vector<std::optional<Rat>> dist(n);
  std::vector<char> done(n, 0);
  dist[s] = Rat(0);
  for (;;) {
    int best = -1;
    for (int v = 0; v < n; ++v)
      if (!done[v] && dist[v] && (best < 0 || *dist[v] < *dist[best])) best = v;
    if (best < 0) break;
    done[best] = 1;
    if (best == t) break;
    for (int e = 0; e < ref.fine.g.num_edges(); ++e) {
      const auto& ed = ref.fine.g.edges[e];
      int w = -1;
      if (ed.u == best) w = ed.v;
      else if (ed.v == best) w = ed.u;
      if (w < 0) continue;
      Rat cand = *dist[best] + ref.fine.len(e);
      if (!dist[w] || cand < *dist[w]) dist[w] = cand;
    }
  }
  if (!dist[t]) fail_internal("disconnected metric graph in distance");
  return *dist[t];
}

bool is_metric_tree(const MetricGraph& m) {
  return m.g.connected() && betti1(m.g) == 0;
}

TreeAttachment attach_tree(const MetricGraph& m, const Point& at,
                           const MetricGraph& tree, int tree_root,
                           const std::string& id_prefix) {
  if (!is_metric_tree(tree)) fail_pre("attach_tree requires a metric tree");
  if (tree_root < 0 || tree_root >= tree.g.num_vertices())
    fail_pre("bad tree root");

  TreeAttachment out;
  Refinement ref = refine_at(m, {at});
  out.graph = ref.fine;
  Point fat = ref.to_fine(at);
  out.attach_vertex = fat.vertex;

  std::vector<int> vmap(tree.g.num_vertices(), -1);
  vmap[tree_root] = out.attach_vertex;
  for (int v = 0; v < tree.g.num_vertices(); ++v) {
    if (v == tree_root) continue;
    vmap[v] = out.graph.g.add_vertex(id_prefix + tree.g.vertices[v].id,
                                     tree.g.vertices[v].weight);
    out.new_vertices.push_back(vmap[v]);
  }
  for (int e = 0; e < tree.g.num_edges(); ++e) {
    const auto& ed = tree.g.edges[e];
    int ne = out.graph.g.add_edge(id_prefix + ed.id, vmap[ed.u], vmap[ed.v]);
    out.graph.length.push_back(tree.len(e));
    out.new_edges.push_back(ne);
  }

  // retraction back onto the refined base model
  Retraction r;
  r.core = ref.fine;
  r.vertex_image.resize(out.graph.g.num_vertices());
  for (int v = 0; v < ref.fine.g.num_vertices(); ++v)
    r.vertex_image[v] = Point::at_vertex(v);
  for (int v = ref.fine.g.num_vertices(); v < out.graph.g.num_vertices(); ++v)
    r.vertex_image[v] = Point::at_vertex(out.attach_vertex);
  r.edge_image.resize(out.graph.g.num_edges());
  for (int e = 0; e < ref.fine.g.num_edges(); ++e)
    r.edge_image[e].path.push_back({e, Rat(0), ref.fine.len(e), false});
  for (int e = ref.fine.g.num_edges(); e < out.graph.g.num_edges(); ++e) {
    r.edge_image[e].collapsed = true;
    r.edge_image[e].target = Point::at_vertex(out.attach_vertex);
  }
  out.retract_to_base = std::move(r);
  return out;
}

}  // namespace tropigon
