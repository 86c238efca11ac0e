#include "tropigon/morphism.hpp"

#include "tropigon/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace tropigon {

MetricGraph IndexedMorphism::source_metric() const {
  if (!src_len) fail_pre("morphism has no source lengths");
  return MetricGraph{src, *src_len};
}

MetricGraph IndexedMorphism::target_metric() const {
  if (!tgt_len) fail_pre("morphism has no target lengths");
  return MetricGraph{tgt, *tgt_len};
}

Point IndexedMorphism::map_point(const Point& p) const {
  if (!metric()) fail_pre("mapping points requires a metric morphism");
  if (p.is_vertex()) return Point::at_vertex(vertex_map[p.vertex]);
  const EdgeImage& im = edge_map[p.edge];
  if (im.contracted()) return Point::at_vertex(im.vertex);
  MetricGraph target{tgt, *tgt_len};
  Rat scaled = p.offset * mu[p.edge];
  Rat off = im.flip ? (*tgt_len)[im.edge] - scaled : scaled;
  return Point::on_edge(target, im.edge, off);
}

namespace {

// Target edges incident to a vertex, as a set (loops once).
std::vector<int> edges_at(const WeightedGraph& g, int v) {
  std::vector<int> out;
  for (int e = 0; e < g.num_edges(); ++e)
    if (g.edges[e].u == v || g.edges[e].v == v) out.push_back(e);
  return out;
}

}  // namespace

MorphismReport check_morphism(const IndexedMorphism& phi) {
  MorphismReport rep;
  const WeightedGraph& S = phi.src;
  const WeightedGraph& T = phi.tgt;

  auto complain = [&](const std::string& msg) { rep.violations.push_back(msg); };

  if (static_cast<int>(phi.vertex_map.size()) != S.num_vertices())
    complain("vertex map size mismatch");
  if (static_cast<int>(phi.edge_map.size()) != S.num_edges())
    complain("edge map size mismatch");
  if (static_cast<int>(phi.mu.size()) != S.num_edges())
    complain("index vector size mismatch");
  if (!rep.violations.empty()) return rep;

  for (int v = 0; v < S.num_vertices(); ++v)
    if (phi.vertex_map[v] < 0 || phi.vertex_map[v] >= T.num_vertices())
      complain("vertex " + S.vertices[v].id + " maps outside the target");

  for (int e = 0; e < S.num_edges(); ++e) {
    const auto& im = phi.edge_map[e];
    int fu = phi.vertex_map[S.edges[e].u];
    int fv = phi.vertex_map[S.edges[e].v];
    if (im.contracted()) {
      if (phi.mu[e] != 0)
        complain("contracted edge " + S.edges[e].id + " has nonzero index");
      if (im.vertex != fu || im.vertex != fv)
        complain("contracted edge " + S.edges[e].id +
                 " does not map to the common endpoint image");
    } else {
      if (im.edge < 0 || im.edge >= T.num_edges()) {
        complain("edge " + S.edges[e].id + " maps outside the target");
        continue;
      }
      if (phi.mu[e] < 1)
        complain("non-contracted edge " + S.edges[e].id + " has index < 1");
      int tu = T.edges[im.edge].u, tv = T.edges[im.edge].v;
      int want_u = im.flip ? tv : tu;
      int want_v = im.flip ? tu : tv;
      if (fu != want_u || fv != want_v)
        complain("edge " + S.edges[e].id + " is endpoint-incompatible with " +
                 T.edges[im.edge].id);
    }
  }
  rep.structurally_valid = rep.violations.empty();
  if (!rep.structurally_valid) return rep;

  // fiber index sums per source vertex and target edge
  rep.fiber_counts.assign(S.num_vertices(), {});
  for (int e = 0; e < S.num_edges(); ++e) {
    const auto& im = phi.edge_map[e];
    if (im.contracted()) continue;
    std::set<int> ends = {S.edges[e].u, S.edges[e].v};
    for (int x : ends) rep.fiber_counts[x][im.edge] += phi.mu[e];
  }

  rep.harmonic = true;
  rep.non_degenerate = true;
  rep.local_degree.assign(S.num_vertices(), 0);
  for (int x = 0; x < S.num_vertices(); ++x) {
    std::vector<int> incident = edges_at(T, phi.vertex_map[x]);
    int common = -1;
    bool constant = true;
    int best = 0;
    for (int te : incident) {
      auto it = rep.fiber_counts[x].find(te);
      int val = it == rep.fiber_counts[x].end() ? 0 : it->second;
      best = std::max(best, val);
      if (common < 0) common = val;
      else if (common != val) constant = false;
    }
    if (!constant) rep.harmonic = false;
    rep.local_degree[x] = incident.empty() ? 0 : (constant ? common : best);
    if (best < 1 && !incident.empty()) rep.non_degenerate = false;
    if (incident.empty()) rep.non_degenerate = false;
  }
  // a morphism onto a single-vertex target is conventionally degenerate
  // (every local degree is the empty sum)

  if (rep.harmonic && T.num_edges() > 0) {
    std::vector<int> fiber_total(T.num_edges(), 0);
    for (int e = 0; e < S.num_edges(); ++e)
      if (!phi.edge_map[e].contracted()) fiber_total[phi.edge_map[e].edge] += phi.mu[e];
    bool same = std::all_of(fiber_total.begin(), fiber_total.end(),
                            [&](int d) { return d == fiber_total[0]; });
    if (same) {
      rep.degree = fiber_total[0];
    } else {
      rep.violations.push_back("fiber index sums differ across target edges");
    }
  }

  if (phi.metric()) {
    for (int e = 0; e < S.num_edges(); ++e) {
      const auto& im = phi.edge_map[e];
      if (im.contracted()) continue;
      Rat lhs = Rat(phi.mu[e]) * (*phi.src_len)[e];
      Rat rhs = (*phi.tgt_len)[im.edge];
      if (lhs != rhs) {
        rep.metric_consistent = false;
        std::ostringstream os;
        os << "edge " << S.edges[e].id << ": mu*l = " << rat_to_string(lhs)
           << " but l'(" << T.edges[im.edge].id << ") = " << rat_to_string(rhs);
        rep.metric_violations.push_back(os.str());
      }
    }
  }
  return rep;
}

int horizontal_multiplicity(const IndexedMorphism& phi, const Point& x) {
  MorphismReport rep = check_morphism(phi);
  if (!rep.structurally_valid) fail_pre("morphism is structurally invalid");
  if (!rep.harmonic) fail_pre("horizontal multiplicity requires a harmonic morphism");
  if (x.is_vertex()) return rep.local_degree[x.vertex];
  if (phi.edge_map[x.edge].contracted()) return 0;
  return phi.mu[x.edge];
}

Divisor pullback(const IndexedMorphism& phi, const Divisor& on_target) {
  if (!phi.metric()) fail_pre("pullback requires a metric morphism");
  MorphismReport rep = check_morphism(phi);
  if (!rep.structurally_valid) fail_pre("morphism is structurally invalid");
  if (!rep.harmonic) fail_pre("pullback requires a harmonic morphism");

  MetricGraph src = phi.source_metric();
  Divisor out;
  for (const auto& [p, c] : on_target.coeff) {
    if (p.is_vertex()) {
      for (int x = 0; x < phi.src.num_vertices(); ++x) {
        if (phi.vertex_map[x] != p.vertex) continue;
        int mult = rep.local_degree[x];
        if (mult != 0) out.add(Point::at_vertex(x), mult * c);
      }
    } else {
      for (int e = 0; e < phi.src.num_edges(); ++e) {
        const auto& im = phi.edge_map[e];
        if (im.contracted() || im.edge != p.edge) continue;
        Rat t = im.flip ? ((*phi.tgt_len)[p.edge] - p.offset) / phi.mu[e]
                        : p.offset / phi.mu[e];
        out.add(Point::on_edge(src, e, t), phi.mu[e] * c);
      }
    }
  }
  return out;
}

IndexedMorphism remove_contractions(const IndexedMorphism& phi) {
  if (!phi.metric()) fail_pre("remove_contractions requires a metric morphism");
  MorphismReport rep = check_morphism(phi);
  if (!rep.structurally_valid) fail_pre("morphism is structurally invalid");
  if (!rep.harmonic || !rep.non_degenerate)
    fail_pre("remove_contractions requires a non-degenerate harmonic morphism");

  std::vector<int> contracted;
  for (int e = 0; e < phi.src.num_edges(); ++e)
    if (phi.edge_map[e].contracted()) contracted.push_back(e);
  if (contracted.empty()) return phi;
  for (int e : contracted)
    if (phi.src.is_loop(e)) fail_pre("contracted loop edges are not supported");

  IndexedMorphism psi = phi;
  for (int e : contracted) {
    int u = psi.src.edges[e].u, v = psi.src.edges[e].v;
    int v_img = psi.edge_map[e].vertex;
    std::string base = psi.src.edges[e].id;
    Rat half = (*psi.src_len)[e] / 2;

    // one new leaf on the target
    int nt = psi.tgt.add_vertex(base + ".t", 0);
    int te = psi.tgt.add_edge(base + ".leaf", v_img, nt);
    psi.tgt_len->push_back(half);

    // split e at its midpoint; both halves cover the target leaf
    int w = psi.src.add_vertex(base + ".mid", 0);
    psi.vertex_map.push_back(nt);
    psi.src.edges[e] = {base + ".a", u, w};
    (*psi.src_len)[e] = half;
    psi.edge_map[e] = {te, -1, false};
    psi.mu[e] = 1;
    int h2 = psi.src.add_edge(base + ".b", w, v);
    psi.src_len->push_back(half);
    psi.edge_map.push_back({te, -1, true});
    psi.mu.push_back(1);
    (void)h2;

    // compensating leaves across the fiber of v_img, using the local
    // degrees of the original morphism
    for (int x = 0; x < phi.src.num_vertices(); ++x) {
      if (phi.vertex_map[x] != v_img) continue;
      int count = rep.local_degree[x];
      if (x == u || x == v) count -= 1;
      for (int k = 0; k < count; ++k) {
        int tip = psi.src.add_vertex(base + ".l" + std::to_string(x) + "_" +
                                         std::to_string(k),
                                     0);
        psi.vertex_map.push_back(nt);
        psi.src.add_edge(base + ".le" + std::to_string(x) + "_" + std::to_string(k),
                         x, tip);
        psi.src_len->push_back(half);
        psi.edge_map.push_back({te, -1, false});
        psi.mu.push_back(1);
      }
    }
  }

  MorphismReport after = check_morphism(psi);
  if (!after.structurally_valid || !after.harmonic || !after.non_degenerate ||
      after.degree != rep.degree || !after.metric_consistent)
    fail_internal("contraction removal produced an invalid morphism");
  return psi;
}

std::pair<bool, int> riemann_hurwitz_local(const IndexedMorphism& phi, int v) {
  if (v < 0 || v >= phi.src.num_vertices()) fail_pre("unknown source vertex");
  int image = phi.vertex_map[v];
  std::vector<int> incident = edges_at(phi.tgt, image);
  int m = 0;
  if (!incident.empty()) {
    int first = incident.front();
    for (int e = 0; e < phi.src.num_edges(); ++e) {
      const auto& im = phi.edge_map[e];
      if (im.contracted() || im.edge != first) continue;
      if (phi.src.edges[e].u == v || phi.src.edges[e].v == v) m += phi.mu[e];
    }
  }
  int ram = 0;
  for (int e = 0; e < phi.src.num_edges(); ++e) {
    if (phi.edge_map[e].contracted()) continue;
    if (phi.src.edges[e].u == v || phi.src.edges[e].v == v) ram += phi.mu[e] - 1;
  }
  int lhs = 2 - 2 * phi.src.vertices[v].weight;
  int rhs = m * (2 - 2 * phi.tgt.vertices[image].weight) - ram;
  return {lhs == rhs, rhs - lhs};
}

}  // namespace tropigon
