#include "tropigon/graph.hpp"

#include "tropigon/error.hpp"

#include <algorithm>
#include <array>
#include <climits>
#include <cstdint>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace tropigon {

int WeightedGraph::add_vertex(std::string id, int weight) {
  vertices.push_back({std::move(id), weight});
  return num_vertices() - 1;
}

int WeightedGraph::add_edge(std::string id, int u, int v) {
  edges.push_back({std::move(id), u, v});
  return num_edges() - 1;
}

int WeightedGraph::vertex_index(const std::string& id) const {
  for (int i = 0; i < num_vertices(); ++i)
    if (vertices[i].id == id) return i;
  return -1;
}

int WeightedGraph::edge_index(const std::string& id) const {
  for (int i = 0; i < num_edges(); ++i)
    if (edges[i].id == id) return i;
  return -1;
}

int WeightedGraph::other_end(int e, int v) const {
  const Edge& ed = edges[e];
  if (ed.u == v) return ed.v;
  if (ed.v == v) return ed.u;
  fail_pre("edge " + ed.id + " is not incident to the given vertex");
}

std::vector<int> WeightedGraph::ends_at(int v) const {
  std::vector<int> out;
  for (int e = 0; e < num_edges(); ++e) {
    if (edges[e].u == v) out.push_back(e);
    if (edges[e].v == v) out.push_back(e);
  }
  return out;
}

int WeightedGraph::valence(int v) const {
  return static_cast<int>(ends_at(v).size());
}

bool WeightedGraph::connected() const {
  if (vertices.empty()) return false;
  std::vector<char> seen(vertices.size(), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (const Edge& e : edges) {
      if (e.u == v && !seen[e.v]) seen[e.v] = 1, q.push(e.v);
      if (e.v == v && !seen[e.u]) seen[e.u] = 1, q.push(e.u);
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c; });
}

void WeightedGraph::validate() const {
  std::set<std::string> vids, eids;
  for (const Vertex& v : vertices) {
    if (v.weight < 0) fail_structure("vertex " + v.id + " has negative weight");
    if (!vids.insert(v.id).second) fail_structure("duplicate vertex id " + v.id);
  }
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= num_vertices() || e.v < 0 || e.v >= num_vertices())
      fail_structure("edge " + e.id + " has a dangling endpoint");
    if (!eids.insert(e.id).second) fail_structure("duplicate edge id " + e.id);
  }
  if (!connected()) fail_structure("graph is not connected");
}

int betti1(const WeightedGraph& g) {
  return g.num_edges() - g.num_vertices() + 1;
}

int genus(const WeightedGraph& g) {
  int w = 0;
  for (const auto& v : g.vertices) w += v.weight;
  return w + betti1(g);
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

Contraction contract_edges(const WeightedGraph& g, const std::set<int>& s) {
  for (int e : s)
    if (e < 0 || e >= g.num_edges()) fail_pre("unknown edge index in contraction set");

  UnionFind uf(g.num_vertices());
  std::vector<int> cycle_at(g.num_vertices(), 0);
  for (int e : s) {
    const auto& ed = g.edges[e];
    if (!uf.unite(ed.u, ed.v)) ++cycle_at[uf.find(ed.u)];
  }
  std::vector<int> root(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) root[v] = uf.find(v);

  Contraction out;
  out.vertex_map.assign(g.num_vertices(), -1);
  std::map<int, int> new_of_root;
  for (int v = 0; v < g.num_vertices(); ++v) {
    int r = root[v];
    if (!new_of_root.count(r)) new_of_root[r] = out.graph.add_vertex("", 0);
  }
  for (int v = 0; v < g.num_vertices(); ++v) out.vertex_map[v] = new_of_root[root[v]];

  // Merged vertex: weight is the group sum plus one per independent
  // contracted cycle; id is the lexicographically smallest member id.
  std::vector<std::string> best_id(out.graph.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) {
    int nv = out.vertex_map[v];
    out.graph.vertices[nv].weight += g.vertices[v].weight;
    if (best_id[nv].empty() || g.vertices[v].id < best_id[nv])
      best_id[nv] = g.vertices[v].id;
  }
  for (int v = 0; v < g.num_vertices(); ++v)
    if (root[v] == v) out.graph.vertices[out.vertex_map[v]].weight += cycle_at[v];
  for (int nv = 0; nv < out.graph.num_vertices(); ++nv)
    out.graph.vertices[nv].id = best_id[nv];

  out.edge_map.assign(g.num_edges(), -1);
  for (int e = 0; e < g.num_edges(); ++e) {
    if (s.count(e)) continue;
    const auto& ed = g.edges[e];
    out.edge_map[e] =
        out.graph.add_edge(ed.id, out.vertex_map[ed.u], out.vertex_map[ed.v]);
  }
  return out;
}

bool is_stable(const WeightedGraph& g) {
  for (int v = 0; v < g.num_vertices(); ++v)
    if (g.vertices[v].weight == 0 && g.valence(v) < 3) return false;
  return true;
}

Contraction stable_model(const WeightedGraph& g) {
  if (genus(g) < 2) fail_pre("stable model requires genus >= 2");
  Contraction acc;
  acc.graph = g;
  acc.vertex_map.resize(g.num_vertices());
  std::iota(acc.vertex_map.begin(), acc.vertex_map.end(), 0);
  acc.edge_map.resize(g.num_edges());
  std::iota(acc.edge_map.begin(), acc.edge_map.end(), 0);

  for (;;) {
    int target = -1;
    for (int v = 0; v < acc.graph.num_vertices() && target < 0; ++v) {
      if (acc.graph.vertices[v].weight == 0 && acc.graph.valence(v) < 3) {
        auto ends = acc.graph.ends_at(v);
        if (ends.empty())
          fail_internal("unstable isolated vertex in a genus >= 2 graph");
        target = ends.front();
      }
    }
    if (target < 0) break;
    Contraction step = contract_edges(acc.graph, {target});
    for (int& m : acc.vertex_map) m = step.vertex_map[m];
    for (int& m : acc.edge_map)
      if (m >= 0) m = step.edge_map[m];
    acc.graph = std::move(step.graph);
  }
  return acc;
}

LooplessModel loopless_model(const WeightedGraph& g) {
  LooplessModel out;
  out.edge_map.assign(g.num_edges(), -1);
  out.graph.vertices = g.vertices;
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edges[e];
    if (!g.is_loop(e)) {
      out.edge_map[e] = out.graph.add_edge(ed.id, ed.u, ed.v);
      continue;
    }
    int mid = out.graph.add_vertex(ed.id + ".mid", 0);
    int h1 = out.graph.add_edge(ed.id + ".a", ed.u, mid);
    int h2 = out.graph.add_edge(ed.id + ".b", mid, ed.v);
    out.splits.push_back({e, mid, h1, h2});
  }
  return out;
}

namespace {

// Unit-capacity max flow via BFS augmentation. Desk scale.
int max_flow_units(const WeightedGraph& g, int s, int t) {
  int m = g.num_edges();
  std::vector<int> cap_uv(m, 1), cap_vu(m, 1);
  int flow = 0;
  for (;;) {
    std::vector<int> pred_edge(g.num_vertices(), -1), pred_dir(g.num_vertices(), 0),
        pred_vertex(g.num_vertices(), -1);
    std::vector<char> seen(g.num_vertices(), 0);
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty() && !seen[t]) {
      int v = q.front();
      q.pop();
      for (int e = 0; e < m; ++e) {
        if (g.is_loop(e)) continue;
        const auto& ed = g.edges[e];
        if (ed.u == v && cap_uv[e] > 0 && !seen[ed.v]) {
          seen[ed.v] = 1;
          pred_edge[ed.v] = e;
          pred_dir[ed.v] = +1;
          pred_vertex[ed.v] = v;
          q.push(ed.v);
        } else if (ed.v == v && cap_vu[e] > 0 && !seen[ed.u]) {
          seen[ed.u] = 1;
          pred_edge[ed.u] = e;
          pred_dir[ed.u] = -1;
          pred_vertex[ed.u] = v;
          q.push(ed.u);
        }
      }
    }
    if (!seen[t]) return flow;
    for (int v = t; v != s; v = pred_vertex[v]) {
      int e = pred_edge[v];
      if (pred_dir[v] > 0) {
        --cap_uv[e];
        ++cap_vu[e];
      } else {
        --cap_vu[e];
        ++cap_uv[e];
      }
    }
    ++flow;
  }
}

bool connected_without(const WeightedGraph& g, const std::set<int>& removed) {
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
  return count == g.num_vertices();
}

}  // namespace

int edge_connectivity(const WeightedGraph& g) {
  if (!g.connected()) fail_pre("edge connectivity requires a connected graph");
  if (g.num_vertices() < 2) return INT_MAX;
  int best = INT_MAX;
  for (int t = 1; t < g.num_vertices(); ++t)
    best = std::min(best, max_flow_units(g, 0, t));
  return best;
}

std::vector<EdgeCut> enumerate_3_edge_cuts(const WeightedGraph& g) {
  std::vector<EdgeCut> cuts;
  int m = g.num_edges();
  std::vector<int> nonloop;
  for (int e = 0; e < m; ++e)
    if (!g.is_loop(e)) nonloop.push_back(e);
  auto disconnects = [&](std::set<int> rem) { return !connected_without(g, rem); };
  for (size_t i = 0; i < nonloop.size(); ++i) {
    int a = nonloop[i];
    if (disconnects({a})) continue;
    for (size_t j = i + 1; j < nonloop.size(); ++j) {
      int b = nonloop[j];
      if (disconnects({b}) || disconnects({a, b})) continue;
      for (size_t k = j + 1; k < nonloop.size(); ++k) {
        int c = nonloop[k];
        if (!disconnects({a, b, c})) continue;
        if (disconnects({c}) || disconnects({a, c}) || disconnects({b, c})) continue;
        EdgeCut cut;
        cut.edges = {a, b, c};
        std::vector<char> seen(g.num_vertices(), 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        while (!q.empty()) {
          int v = q.front();
          q.pop();
          for (int e = 0; e < m; ++e) {
            if (e == a || e == b || e == c) continue;
            const auto& ed = g.edges[e];
            int w = -1;
            if (ed.u == v) w = ed.v;
            else if (ed.v == v) w = ed.u;
            if (w >= 0 && !seen[w]) seen[w] = 1, q.push(w);
          }
        }
        for (int v = 0; v < g.num_vertices(); ++v)
          if (seen[v]) cut.side.push_back(v);
        cuts.push_back(std::move(cut));
      }
    }
  }
  return cuts;
}

// ---------------------------------------------------------------------------
// Canonical labeling: joint colour refinement on vertices and edge classes
// with individualization of both. Colours are 64-bit hashes of invariant
// data; a collision can only coarsen the refinement, never break
// correctness, because the certificate re-encodes the structure explicitly.

namespace {

uint64_t mix(uint64_t h, uint64_t x) {
  h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h * 0x2545f4914f6cdd1dull + 0x9e3779b97f4a7c15ull;
}

struct CanonCtx {
  const WeightedGraph& g;
  std::vector<int> eclass;
  int num_classes = 0;
  std::vector<std::vector<std::pair<int, int>>> inc;  // v -> (edge, other end)

  CanonCtx(const WeightedGraph& g_, const std::vector<int>* classes) : g(g_) {
    if (classes) eclass = *classes;
    else eclass.assign(g.num_edges(), 0);
    for (int c : eclass) num_classes = std::max(num_classes, c + 1);
    if (g.num_edges() > 0) num_classes = std::max(num_classes, 1);
    inc.resize(g.num_vertices());
    for (int e = 0; e < g.num_edges(); ++e) {
      inc[g.edges[e].u].push_back({e, g.edges[e].v});
      inc[g.edges[e].v].push_back({e, g.edges[e].u});  // loops twice
    }
  }

  void refine(std::vector<uint64_t>& vcol, std::vector<uint64_t>& ccol) const {
    int n = g.num_vertices(), m = g.num_edges();
    for (int round = 0; round < n + num_classes + 2; ++round) {
      std::vector<uint64_t> ccol2(num_classes, 0);
      {
        std::vector<std::vector<uint64_t>> members(num_classes);
        for (int e = 0; e < m; ++e) {
          uint64_t a = vcol[g.edges[e].u], b = vcol[g.edges[e].v];
          if (a > b) std::swap(a, b);
          members[eclass[e]].push_back(mix(a, b));
        }
        for (int c = 0; c < num_classes; ++c) {
          std::sort(members[c].begin(), members[c].end());
          uint64_t h = mix(0x9999, ccol[c]);
          for (uint64_t x : members[c]) h = mix(h, x);
          ccol2[c] = h;
        }
      }
      std::vector<uint64_t> vcol2(n);
      for (int v = 0; v < n; ++v) {
        std::vector<uint64_t> local;
        local.reserve(inc[v].size());
        for (auto [e, w] : inc[v]) local.push_back(mix(ccol2[eclass[e]], vcol[w]));
        std::sort(local.begin(), local.end());
        uint64_t h = mix(0x55, vcol[v]);
        for (uint64_t x : local) h = mix(h, x);
        vcol2[v] = h;
      }
      if (vcol2 == vcol && ccol2 == ccol) break;
      vcol = std::move(vcol2);
      ccol = std::move(ccol2);
    }
  }

  std::string encode(const std::vector<uint64_t>& vcol,
                     const std::vector<uint64_t>& ccol) const {
    int n = g.num_vertices(), m = g.num_edges();
    std::vector<int> order(n);
    {
      std::vector<std::pair<uint64_t, int>> by_col;
      by_col.reserve(n);
      for (int v = 0; v < n; ++v) by_col.push_back({vcol[v], v});
      std::sort(by_col.begin(), by_col.end());
      for (int i = 0; i < n; ++i) order[i] = by_col[i].second;
    }
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[order[i]] = i;
    std::vector<int> crank(num_classes, 0);
    {
      std::vector<std::pair<uint64_t, int>> by_col;
      for (int c = 0; c < num_classes; ++c) by_col.push_back({ccol[c], c});
      std::sort(by_col.begin(), by_col.end());
      for (int i = 0; i < num_classes; ++i) crank[by_col[i].second] = i;
    }
    std::vector<std::array<int, 3>> tr;
    tr.reserve(m);
    for (int e = 0; e < m; ++e) {
      int a = pos[g.edges[e].u], b = pos[g.edges[e].v];
      if (a > b) std::swap(a, b);
      tr.push_back({a, b, crank[eclass[e]]});
    }
    std::sort(tr.begin(), tr.end());
    std::ostringstream os;
    os << "V";
    for (int i = 0; i < n; ++i) os << ':' << g.vertices[order[i]].weight;
    os << ";E";
    for (const auto& t : tr) os << ':' << t[0] << ',' << t[1] << ',' << t[2];
    return os.str();
  }

  void search(const std::vector<uint64_t>& vcol, const std::vector<uint64_t>& ccol,
              std::string& best, bool& have_best) const {
    // branch on the first non-singleton vertex cell, then class cell
    {
      std::map<uint64_t, std::vector<int>> cells;
      for (int v = 0; v < g.num_vertices(); ++v) cells[vcol[v]].push_back(v);
      for (const auto& kv : cells) {
        if (kv.second.size() <= 1) continue;
        for (int v : kv.second) {
          std::vector<uint64_t> vc = vcol, cc = ccol;
          vc[v] = mix(vc[v], 0xfeedfacecafef00dull);
          refine(vc, cc);
          search(vc, cc, best, have_best);
        }
        return;
      }
    }
    {
      std::map<uint64_t, std::vector<int>> cells;
      for (int c = 0; c < num_classes; ++c) cells[ccol[c]].push_back(c);
      for (const auto& kv : cells) {
        if (kv.second.size() <= 1) continue;
        for (int c : kv.second) {
          std::vector<uint64_t> vc = vcol, cc = ccol;
          cc[c] = mix(cc[c], 0xdecafbadf00dull);
          refine(vc, cc);
          search(vc, cc, best, have_best);
        }
        return;
      }
    }
    std::string cert = encode(vcol, ccol);
    if (!have_best || cert < best) {
      best = std::move(cert);
      have_best = true;
    }
  }
};

}  // namespace

std::string canonical_certificate(const WeightedGraph& g,
                                  const std::vector<int>* edge_classes) {
  if (edge_classes && static_cast<int>(edge_classes->size()) != g.num_edges())
    fail_pre("edge class vector size mismatch");
  if (g.num_vertices() == 0) return "V;E";
  CanonCtx ctx(g, edge_classes);
  std::vector<uint64_t> vcol(g.num_vertices()), ccol(ctx.num_classes, 0xabcde);
  for (int v = 0; v < g.num_vertices(); ++v)
    vcol[v] = mix(0x12345, static_cast<uint64_t>(g.vertices[v].weight));
  ctx.refine(vcol, ccol);
  std::string best;
  bool have = false;
  ctx.search(vcol, ccol, best, have);
  return best;
}

bool are_isomorphic(const WeightedGraph& a, const WeightedGraph& b) {
  if (a.num_vertices() != b.num_vertices() || a.num_edges() != b.num_edges())
    return false;
  auto profile = [](const WeightedGraph& g) {
    std::vector<std::pair<int, int>> p;
    for (int v = 0; v < g.num_vertices(); ++v)
      p.push_back({g.valence(v), g.vertices[v].weight});
    std::sort(p.begin(), p.end());
    return p;
  };
  if (profile(a) != profile(b)) return false;
  return canonical_certificate(a) == canonical_certificate(b);
}

}  // namespace tropigon
