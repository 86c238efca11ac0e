#pragma once

// Independent oracles for cross-checking the library. These share no code
// with the implementation paths they verify: combinatorial chip-firing on
// the plain multigraph, brute-force connectivity, and exhaustive path
// enumeration for distances.

#include "tropigon/graph.hpp"
#include "tropigon/rational.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace oracles {

using tropigon::Rat;
using tropigon::WeightedGraph;

// --- combinatorial chip firing -------------------------------------------

using Chips = std::vector<long long>;  // per vertex

// Discrete Dhar from q: a vertex burns when more burnt-incident edges
// arrive than it has chips.
inline std::vector<char> dhar(const WeightedGraph& g, const Chips& chips, int q) {
  std::vector<char> burnt(g.num_vertices(), 0);
  burnt[q] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < g.num_vertices(); ++v) {
      if (burnt[v]) continue;
      long long dirs = 0;
      for (const auto& e : g.edges) {
        if (e.u == v && e.v != v && burnt[e.v]) ++dirs;
        if (e.v == v && e.u != v && burnt[e.u]) ++dirs;
      }
      if (dirs > chips[v]) {
        burnt[v] = 1;
        changed = true;
      }
    }
  }
  return burnt;
}

// q-reduction of a divisor that is effective away from q.
inline Chips reduce(const WeightedGraph& g, Chips chips, int q) {
  for (;;) {
    std::vector<char> burnt = dhar(g, chips, q);
    bool all = std::all_of(burnt.begin(), burnt.end(), [](char c) { return c; });
    if (all) return chips;
    // fire the unburnt set
    for (int v = 0; v < g.num_vertices(); ++v) {
      if (burnt[v]) continue;
      for (const auto& e : g.edges) {
        if (e.u == e.v) continue;
        if (e.u == v && burnt[e.v]) --chips[v], ++chips[e.v];
        else if (e.v == v && burnt[e.u]) --chips[v], ++chips[e.u];
      }
    }
  }
}

// Is the divisor equivalent to an effective one? Clears debts one vertex
// at a time using the maximality of reduced divisors.
inline bool winnable(const WeightedGraph& g, Chips chips) {
  for (int round = 0; round <= g.num_vertices() + 1; ++round) {
    int debt_vertex = -1;
    for (int v = 0; v < g.num_vertices(); ++v)
      if (chips[v] < 0) {
        debt_vertex = v;
        break;
      }
    if (debt_vertex < 0) return true;
    Chips positive(chips.size(), 0);
    for (size_t v = 0; v < chips.size(); ++v)
      if (chips[v] > 0) positive[v] = chips[v];
    Chips red = reduce(g, positive, debt_vertex);
    if (red[debt_vertex] + chips[debt_vertex] < 0) return false;
    for (size_t v = 0; v < chips.size(); ++v)
      red[v] += chips[v] > 0 ? 0 : chips[v];
    chips = red;
  }
  return false;
}

// Baker-Norine rank by exhaustive subtraction of effective divisors.
inline int bn_rank(const WeightedGraph& g, const Chips& chips) {
  long long deg = 0;
  for (long long c : chips) deg += c;
  if (deg < 0 || !winnable(g, chips)) return -1;
  int n = g.num_vertices();
  for (int r = 1;; ++r) {
    if (r > deg) return static_cast<int>(deg);
    // enumerate all effective divisors of degree r on the vertices
    std::vector<int> e(n, 0);
    e[0] = r;
    for (;;) {
      Chips test = chips;
      for (int v = 0; v < n; ++v) test[v] -= e[v];
      if (!winnable(g, test)) return r - 1;
      // next composition of r into n parts
      int i = 0;
      while (i < n - 1 && e[i] == 0) ++i;
      if (i == n - 1) break;
      int head = e[i];
      e[i] = 0;
      e[i + 1] += 1;
      e[0] = head - 1;
    }
  }
}

// --- brute-force connectivity --------------------------------------------

inline bool connected_without(const WeightedGraph& g, const std::set<int>& removed) {
  if (g.num_vertices() == 0) return false;
  std::vector<char> seen(g.num_vertices(), 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int e = 0; e < g.num_edges(); ++e) {
      if (removed.count(e)) continue;
      const auto& ed = g.edges[e];
      int w = ed.u == v ? ed.v : (ed.v == v ? ed.u : -1);
      if (w >= 0 && !seen[w]) seen[w] = 1, ++count, stack.push_back(w);
    }
  }
  return count == g.num_vertices();
}

// Minimum disconnecting set size by trying all subsets of size < k; returns
// true iff the graph is k-edge connected.
inline bool k_edge_connected_brute(const WeightedGraph& g, int k) {
  std::vector<int> nonloop;
  for (int e = 0; e < g.num_edges(); ++e)
    if (g.edges[e].u != g.edges[e].v) nonloop.push_back(e);
  int m = static_cast<int>(nonloop.size());
  for (int size = 1; size < k; ++size) {
    std::vector<int> pick(size, 0);
    for (int i = 0; i < size; ++i) pick[i] = i;
    if (size > m) continue;
    for (;;) {
      std::set<int> rem;
      for (int i : pick) rem.insert(nonloop[i]);
      if (!connected_without(g, rem)) return false;
      int i = size - 1;
      while (i >= 0 && pick[i] == m - size + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return true;
}

// --- exhaustive shortest path --------------------------------------------

// All simple paths between two vertices; exponential, for tiny graphs.
inline std::optional<Rat> brute_distance(const WeightedGraph& g,
                                         const std::vector<Rat>& len, int s, int t) {
  std::optional<Rat> best;
  std::vector<char> used_edge(g.num_edges(), 0);
  struct Frame {
    int v;
    Rat acc;
  };
  std::function<void(int, Rat)> dfs = [&](int v, Rat acc) {
    if (best && acc >= *best) return;
    if (v == t) {
      best = acc;
      return;
    }
    for (int e = 0; e < g.num_edges(); ++e) {
      if (used_edge[e]) continue;
      const auto& ed = g.edges[e];
      int w = ed.u == v ? ed.v : (ed.v == v ? ed.u : -1);
      if (w < 0) continue;
      used_edge[e] = 1;
      dfs(w, acc + len[e]);
      used_edge[e] = 0;
    }
  };
  dfs(s, Rat(0));
  return best;
}

}  // namespace oracles
