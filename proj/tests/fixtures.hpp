#pragma once

#include "tropigon/metric.hpp"

#include <string>
#include <vector>

namespace fixtures {

using tropigon::MetricGraph;
using tropigon::Rat;

// k parallel edges between two vertices u, v.
inline MetricGraph banana(const std::vector<Rat>& lengths) {
  MetricGraph m;
  m.g.add_vertex("u", 0);
  m.g.add_vertex("v", 0);
  for (size_t i = 0; i < lengths.size(); ++i) {
    m.g.add_edge("e" + std::to_string(i), 0, 1);
    m.length.push_back(lengths[i]);
  }
  return m;
}

inline MetricGraph unit_banana3() { return banana({1, 1, 1}); }

// cycle with the given edge lengths
inline MetricGraph cycle(const std::vector<Rat>& lengths) {
  MetricGraph m;
  int n = static_cast<int>(lengths.size());
  for (int i = 0; i < n; ++i) m.g.add_vertex("v" + std::to_string(i), 0);
  for (int i = 0; i < n; ++i) {
    m.g.add_edge("e" + std::to_string(i), i, (i + 1) % n);
    m.length.push_back(lengths[i]);
  }
  return m;
}

inline MetricGraph unit_k4() {
  MetricGraph m;
  for (int i = 0; i < 4; ++i) m.g.add_vertex("v" + std::to_string(i), 0);
  int c = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      m.g.add_edge("e" + std::to_string(c++), i, j);
      m.length.push_back(1);
    }
  return m;
}

// Triangular prism: two triangles a0a1a2 / b0b1b2 (side lengths `side`)
// joined by rungs a_i b_i of the given lengths. The divisor
//   a0 + a2 + (rung1 at distance rung[1]-rung[0] from a1)
// has degree 3 and rank 1; with pairwise distinct rung lengths this is the
// graph whose naive parallel-class morphism fails the length relations.
inline MetricGraph prism(const Rat& r0, const Rat& r1, const Rat& r2,
                         const Rat& side = 1) {
  MetricGraph m;
  for (int i = 0; i < 3; ++i) m.g.add_vertex("a" + std::to_string(i), 0);
  for (int i = 0; i < 3; ++i) m.g.add_vertex("b" + std::to_string(i), 0);
  const Rat rungs[3] = {r0, r1, r2};
  for (int i = 0; i < 3; ++i) {
    m.g.add_edge("r" + std::to_string(i), i, 3 + i);
    m.length.push_back(rungs[i]);
  }
  for (int i = 0; i < 3; ++i) {
    m.g.add_edge("ta" + std::to_string(i), i, (i + 1) % 3);
    m.length.push_back(side);
    m.g.add_edge("tb" + std::to_string(i), 3 + i, 3 + (i + 1) % 3);
    m.length.push_back(side);
  }
  return m;
}

// Genus-5 graph with two non-equivalent degree-3 rank-1 divisors: two
// triangles joined by a top rail (two unit edges through mt), a middle
// rail (two unit edges through mm), one bottom rail edge of length 3, and
// a unit rung mt-mm. Divisors: mt + mm + (bottom at 1) resp. (at 2); each
// is synchronized with one triangle, so the chips can always converge.
inline MetricGraph twin_divisor_graph() {
  MetricGraph m;
  m.g.add_vertex("lt", 0);   // 0: left triangle, top
  m.g.add_vertex("lm", 0);   // 1: left triangle, middle
  m.g.add_vertex("lc", 0);   // 2: left triangle corner
  m.g.add_vertex("rt", 0);   // 3
  m.g.add_vertex("rm", 0);   // 4
  m.g.add_vertex("rc", 0);   // 5
  m.g.add_vertex("mt", 0);   // 6: midpoint of the top rail
  m.g.add_vertex("mm", 0);   // 7: midpoint of the middle rail
  auto E = [&](const std::string& id, int u, int v, Rat len) {
    m.g.add_edge(id, u, v);
    m.length.push_back(len);
  };
  E("t1", 0, 6, 1);
  E("t2", 6, 3, 1);
  E("m1", 1, 7, 1);
  E("m2", 7, 4, 1);
  E("bot", 2, 5, 3);
  E("rung", 6, 7, 1);
  E("l1", 0, 1, 1);
  E("l2", 0, 2, 1);
  E("l3", 1, 2, 1);
  E("r1", 3, 4, 1);
  E("r2", 3, 5, 1);
  E("r3", 4, 5, 1);
  return m;
}

// Three unit parallel edges u-v plus two loops at u (lengths 1 and 3/2):
// the two-vertex-core family member with loops. 3*u has rank 1.
inline MetricGraph looped_core_member() {
  MetricGraph m;
  m.g.add_vertex("u", 0);
  m.g.add_vertex("v", 0);
  for (int i = 0; i < 3; ++i) {
    m.g.add_edge("e" + std::to_string(i), 0, 1);
    m.length.push_back(1);
  }
  m.g.add_edge("loop0", 0, 0);
  m.length.push_back(1);
  m.g.add_edge("loop1", 0, 0);
  m.length.push_back(Rat(3, 2));
  return m;
}

// Dumbbell: two loops joined by a bridge (genus 2, edge connectivity 1).
inline MetricGraph dumbbell() {
  MetricGraph m;
  m.g.add_vertex("a", 0);
  m.g.add_vertex("b", 0);
  m.g.add_edge("la", 0, 0);
  m.length.push_back(2);
  m.g.add_edge("bridge", 0, 1);
  m.length.push_back(1);
  m.g.add_edge("lb", 1, 1);
  m.length.push_back(3);
  return m;
}

}  // namespace fixtures
