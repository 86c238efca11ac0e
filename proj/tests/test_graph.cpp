#include <doctest.h>

#include "tropigon/error.hpp"
#include "tropigon/graph.hpp"
#include "tropigon/moduli.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <climits>
#include <numeric>
#include <random>

using namespace tropigon;

namespace {

WeightedGraph single_loop_vertex() {
  WeightedGraph g;
  g.add_vertex("v", 0);
  g.add_edge("l", 0, 0);
  return g;
}

WeightedGraph banana_graph(int k) {
  WeightedGraph g;
  g.add_vertex("u", 0);
  g.add_vertex("v", 0);
  for (int i = 0; i < k; ++i) g.add_edge("e" + std::to_string(i), 0, 1);
  return g;
}

WeightedGraph triangle() {
  WeightedGraph g;
  for (int i = 0; i < 3; ++i) g.add_vertex("v" + std::to_string(i), 0);
  for (int i = 0; i < 3; ++i) g.add_edge("e" + std::to_string(i), i, (i + 1) % 3);
  return g;
}

WeightedGraph random_connected_multigraph(std::mt19937& rng, int n, int extra) {
  WeightedGraph g;
  for (int i = 0; i < n; ++i) g.add_vertex("v" + std::to_string(i), 0);
  int c = 0;
  for (int i = 1; i < n; ++i)
    g.add_edge("e" + std::to_string(c++),
               std::uniform_int_distribution<int>(0, i - 1)(rng), i);
  for (int i = 0; i < extra; ++i) {
    int u = std::uniform_int_distribution<int>(0, n - 1)(rng);
    int v = std::uniform_int_distribution<int>(0, n - 1)(rng);
    g.add_edge("e" + std::to_string(c++), u, v);
  }
  return g;
}

WeightedGraph relabel(const WeightedGraph& g, const std::vector<int>& perm) {
  WeightedGraph out;
  std::vector<int> inv(perm.size());
  for (size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
  for (size_t i = 0; i < perm.size(); ++i) {
    const auto& v = g.vertices[perm[i]];
    out.add_vertex("r_" + v.id, v.weight);
  }
  for (const auto& e : g.edges) out.add_edge("r_" + e.id, inv[e.u], inv[e.v]);
  return out;
}

}  // namespace

TEST_CASE("genus of standard graphs") {
  CHECK(genus(single_loop_vertex()) == 1);
  CHECK(genus(banana_graph(3)) == 2);
  // 3-ladder over the 3-vertex path: 9 vertices, 11 edges, genus 3
  auto trees = enumerate_trees(3, 3);
  REQUIRE(trees.size() == 1);
  auto ladders = build_3_ladders(trees[0]);
  REQUIRE(!ladders.empty());
  for (const auto& l : ladders) {
    CHECK(l.type.carrier().num_vertices() == 9);
    CHECK(l.type.carrier().num_edges() == 11);
    CHECK(genus(l.type.carrier()) == 3);
  }
}

TEST_CASE("weighted contraction") {
  WeightedGraph b3 = banana_graph(3);
  Contraction c = contract_edges(b3, {0});
  CHECK(c.graph.num_vertices() == 1);
  CHECK(c.graph.num_edges() == 2);
  CHECK(c.graph.is_loop(0));
  CHECK(genus(c.graph) == 2);

  // a contracted loop turns into weight
  WeightedGraph lv = single_loop_vertex();
  Contraction cl = contract_edges(lv, {0});
  CHECK(cl.graph.num_vertices() == 1);
  CHECK(cl.graph.vertices[0].weight == 1);
  CHECK(genus(cl.graph) == 1);

  // contracting nothing is the identity
  Contraction id = contract_edges(b3, {});
  CHECK(id.graph.num_edges() == 3);
  CHECK(are_isomorphic(id.graph, b3));
}

TEST_CASE("genus preserved under random contractions") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    WeightedGraph g = random_connected_multigraph(rng, 5, 4);
    std::set<int> s;
    for (int e = 0; e < g.num_edges(); ++e)
      if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) s.insert(e);
    CHECK(genus(contract_edges(g, s).graph) == genus(g));
  }
}

TEST_CASE("stability") {
  CHECK(is_stable(banana_graph(3)));
  WeightedGraph path2;
  path2.add_vertex("a", 0);
  path2.add_vertex("b", 0);
  path2.add_edge("e", 0, 1);
  CHECK(!is_stable(path2));
  WeightedGraph heavy;
  heavy.add_vertex("a", 1);
  CHECK(is_stable(heavy));
}

TEST_CASE("stable model") {
  WeightedGraph b3 = banana_graph(3);
  Contraction s = stable_model(b3);
  CHECK(are_isomorphic(s.graph, b3));

  // triangle with one subdivided edge plus a doubled edge: suppression
  // restores a 3-vertex stable graph of the same genus
  WeightedGraph g = triangle();
  int mid = g.add_vertex("m", 0);
  g.edges[0] = {"e0a", 0, mid};
  g.add_edge("e0b", mid, 1);
  g.add_edge("par1", 0, 1);
  g.add_edge("par2", 0, 1);
  REQUIRE(genus(g) == 3);
  Contraction st = stable_model(g);
  CHECK(is_stable(st.graph));
  CHECK(genus(st.graph) == 3);
  // the subdivision point and the valence-2 corner both disappear
  CHECK(st.graph.num_vertices() == 2);
  CHECK(are_isomorphic(st.graph, banana_graph(4)));

  CHECK_THROWS_AS(stable_model(single_loop_vertex()), Error);

  // idempotence
  Contraction twice = stable_model(st.graph);
  CHECK(are_isomorphic(twice.graph, st.graph));
}

TEST_CASE("stable model of the spider ladder matches the figure counts") {
  // tree: spider with legs (2,1,1); its ladders stabilize to 8 vertices
  // and 12 edges of genus 5
  for (const auto& tree : enumerate_trees(5, 3)) {
    bool is_path = true;
    for (int v = 0; v < tree.num_vertices(); ++v)
      if (tree.valence(v) > 2) is_path = false;
    if (is_path) continue;
    for (const auto& ladder : build_3_ladders(tree)) {
      Contraction st = stable_model(ladder.type.carrier());
      CHECK(st.graph.num_vertices() == 8);
      CHECK(st.graph.num_edges() == 12);
      CHECK(genus(st.graph) == 5);
      // agrees with the chain-derived stable part of the type
      CHECK(are_isomorphic(st.graph, ladder.type.stable));
    }
  }
}

TEST_CASE("loopless model") {
  WeightedGraph lv = single_loop_vertex();
  LooplessModel lm = loopless_model(lv);
  CHECK(lm.graph.num_vertices() == 2);
  CHECK(lm.graph.num_edges() == 2);
  CHECK(!lm.graph.is_loop(0));
  CHECK(!lm.graph.is_loop(1));

  WeightedGraph b3 = banana_graph(3);
  CHECK(are_isomorphic(loopless_model(b3).graph, b3));

  WeightedGraph two_loops;
  two_loops.add_vertex("v", 0);
  two_loops.add_edge("l1", 0, 0);
  two_loops.add_edge("l2", 0, 0);
  CHECK(loopless_model(two_loops).graph.num_vertices() == 3);
}

TEST_CASE("edge connectivity against the brute-force oracle") {
  WeightedGraph k4 = fixtures::unit_k4().g;
  CHECK(edge_connectivity(k4) == 3);
  CHECK(oracles::k_edge_connected_brute(k4, 3));
  CHECK(!oracles::k_edge_connected_brute(k4, 4));

  WeightedGraph theta = banana_graph(3);
  CHECK(edge_connectivity(theta) == 3);
  CHECK(oracles::k_edge_connected_brute(theta, 3));

  CHECK(edge_connectivity(fixtures::dumbbell().g) == 1);

  std::mt19937 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    WeightedGraph g = random_connected_multigraph(rng, 5, 5);
    int k = edge_connectivity(g);
    CHECK(oracles::k_edge_connected_brute(g, k));
    if (k < INT_MAX) CHECK(!oracles::k_edge_connected_brute(g, k + 1));
  }
}

TEST_CASE("3-edge cut enumeration") {
  WeightedGraph k4 = fixtures::unit_k4().g;
  auto cuts = enumerate_3_edge_cuts(k4);
  // K4: each vertex star is a 3-cut
  CHECK(cuts.size() == 4);
  for (const auto& cut : cuts) {
    CHECK(cut.edges.size() == 3);
    CHECK((cut.side.size() == 1 || cut.side.size() == 3));
  }

  WeightedGraph theta = banana_graph(3);
  CHECK(enumerate_3_edge_cuts(theta).size() == 1);

  // a graph with a bridge has no minimal 3-cut through it
  WeightedGraph db = fixtures::dumbbell().g;
  for (const auto& cut : enumerate_3_edge_cuts(db))
    for (int e : cut.edges) CHECK(db.edges[e].id != "bridge");
}

TEST_CASE("isomorphism") {
  WeightedGraph b3 = banana_graph(3);
  CHECK(are_isomorphic(b3, relabel(b3, {1, 0})));
  CHECK(!are_isomorphic(b3, triangle()));

  // weights matter
  WeightedGraph heavy = b3;
  heavy.vertices[0].weight = 1;
  CHECK(!are_isomorphic(b3, heavy));

  // loops vs parallel edges
  WeightedGraph two_loops;
  two_loops.add_vertex("a", 0);
  two_loops.add_vertex("b", 0);
  two_loops.add_edge("l", 0, 0);
  two_loops.add_edge("m", 1, 1);
  two_loops.add_edge("c", 0, 1);
  WeightedGraph pseudo;
  pseudo.add_vertex("a", 0);
  pseudo.add_vertex("b", 0);
  pseudo.add_edge("p1", 0, 1);
  pseudo.add_edge("p2", 0, 1);
  pseudo.add_edge("l", 0, 0);
  CHECK(!are_isomorphic(two_loops, pseudo));
}

TEST_CASE("isomorphism is an equivalence relation on random samples") {
  std::mt19937 rng(23);
  std::vector<WeightedGraph> sample;
  for (int i = 0; i < 8; ++i) sample.push_back(random_connected_multigraph(rng, 5, 3));
  for (const auto& g : sample) {
    CHECK(are_isomorphic(g, g));
    std::vector<int> perm(g.num_vertices());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    WeightedGraph h = relabel(g, perm);
    CHECK(are_isomorphic(g, h));
    CHECK(are_isomorphic(h, g));
  }
  for (size_t i = 0; i < sample.size(); ++i)
    for (size_t j = i + 1; j < sample.size(); ++j)
      for (size_t k = j + 1; k < sample.size(); ++k) {
        bool ij = are_isomorphic(sample[i], sample[j]);
        bool jk = are_isomorphic(sample[j], sample[k]);
        bool ik = are_isomorphic(sample[i], sample[k]);
        if (ij && jk) CHECK(ik);
      }
}

TEST_CASE("edge-partition-aware certificates") {
  // two parallel edges in distinct classes that extend differently
  WeightedGraph g;
  g.add_vertex("a", 0);
  g.add_vertex("b", 0);
  g.add_vertex("c", 0);
  g.add_edge("p1", 0, 1);
  g.add_edge("p2", 0, 1);
  g.add_edge("t", 1, 2);
  g.add_edge("t2", 1, 2);
  std::vector<int> classes1 = {0, 1, 0, 1};
  std::vector<int> classes2 = {0, 1, 1, 0};
  CHECK(canonical_certificate(g, &classes1) == canonical_certificate(g, &classes2));
  std::vector<int> classes3 = {0, 1, 0, 0};
  CHECK(canonical_certificate(g, &classes1) != canonical_certificate(g, &classes3));
}
