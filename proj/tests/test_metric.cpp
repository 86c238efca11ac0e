#include <doctest.h>

#include "tropigon/error.hpp"
#include "tropigon/metric.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <random>

using namespace tropigon;
using fixtures::banana;
using fixtures::cycle;
using fixtures::prism;

TEST_CASE("point normalization") {
  MetricGraph m = banana({2, 3, 5});
  CHECK(Point::on_edge(m, 0, Rat(0)) == Point::at_vertex(0));
  CHECK(Point::on_edge(m, 0, Rat(2)) == Point::at_vertex(1));
  Point p = Point::on_edge(m, 1, Rat(1));
  CHECK(!p.is_vertex());
  CHECK(p.edge == 1);
  CHECK_THROWS_AS(Point::on_edge(m, 0, Rat(7)), Error);
}

TEST_CASE("refinement round trip") {
  MetricGraph m = banana({2, 3, 5});
  Point a = Point::on_edge(m, 1, Rat(1));
  Point b = Point::on_edge(m, 1, Rat(5, 2));
  Refinement r = refine_at(m, {a, b});
  CHECK(r.fine.g.num_vertices() == 4);
  CHECK(r.fine.g.num_edges() == 5);
  CHECK(r.to_fine(a).is_vertex());
  CHECK(r.to_coarse(r.to_fine(a)) == a);
  // interior of a piece maps back exactly
  Point c = Point::on_edge(m, 1, Rat(2));
  Point fc = r.to_fine(c);
  CHECK(!fc.is_vertex());
  CHECK(r.to_coarse(fc) == c);
  // lengths add up
  Rat total = 0;
  for (int fe : r.pieces[1]) total += r.fine.len(fe);
  CHECK(total == Rat(3));
}

TEST_CASE("canonical model drops leaves and suppresses valence-2 points") {
  // triangle (1,1,1) with a leaf of length 5
  MetricGraph m;
  for (int i = 0; i < 3; ++i) m.g.add_vertex("v" + std::to_string(i), 0);
  for (int i = 0; i < 3; ++i) {
    m.g.add_edge("e" + std::to_string(i), i, (i + 1) % 3);
    m.length.push_back(1);
  }
  // a triangle alone has genus 1; double one edge to reach genus 2
  m.g.add_edge("d", 0, 1);
  m.length.push_back(1);
  int leaf = m.g.add_vertex("leaf", 0);
  m.g.add_edge("stem", 0, leaf);
  m.length.push_back(5);

  Retraction can = canonical_model(m);
  CHECK(can.core.g.num_vertices() == 2);
  CHECK(can.core.g.num_edges() == 3);  // v2 suppressed, its two edges merge
  CHECK(genus(can.core) == 2);
  // leaf retracts onto its attachment
  Point tip = Point::at_vertex(leaf);
  Point img = can.map_point(m, tip);
  CHECK(img == can.map_point(m, Point::at_vertex(0)));
  // metric preserved on the core: the merged edge has length 2
  bool found = false;
  for (int e = 0; e < can.core.g.num_edges(); ++e)
    if (can.core.len(e) == Rat(2)) found = true;
  CHECK(found);

  CHECK_THROWS_AS(canonical_model(cycle({1, 2, 3, 4})), Error);
}

TEST_CASE("canonical model of a subdivided prism is the prism") {
  MetricGraph p = prism(1, 2, 4);
  Point mid = Point::on_edge(p, 0, Rat(1, 2));
  Refinement r = refine_at(p, {mid});
  Retraction can = canonical_model(r.fine);
  CHECK(can.core.g.num_vertices() == 6);
  CHECK(can.core.g.num_edges() == 9);
  CHECK(are_isomorphic(can.core.g, p.g));
  std::multiset<Rat> lens_in(p.length.begin(), p.length.end());
  std::multiset<Rat> lens_out(can.core.length.begin(), can.core.length.end());
  CHECK(lens_in == lens_out);
}

TEST_CASE("canonical loopless model bisects loops") {
  MetricGraph m = fixtures::dumbbell();
  Retraction can = canonical_loopless_model(m);
  CHECK(can.core.g.num_vertices() == 4);
  CHECK(can.core.g.num_edges() == 5);
  for (int e = 0; e < can.core.g.num_edges(); ++e) CHECK(!can.core.g.is_loop(e));
  // the two halves of each loop have equal length
  std::multiset<Rat> lens(can.core.length.begin(), can.core.length.end());
  CHECK(lens == std::multiset<Rat>{Rat(1), Rat(1), Rat(1), Rat(3, 2), Rat(3, 2)});
  // loopless input: canonical loopless = canonical
  MetricGraph p = prism(1, 2, 4);
  CHECK(canonical_loopless_model(p).core.g.num_edges() == 9);
}

TEST_CASE("distance") {
  MetricGraph theta = banana({1, 2, 3});
  Point u = Point::at_vertex(0), v = Point::at_vertex(1);
  CHECK(distance(theta, u, u) == Rat(0));
  CHECK(distance(theta, u, v) == Rat(1));
  // two interior points on one edge
  Point a = Point::on_edge(theta, 2, Rat(1, 2));
  Point b = Point::on_edge(theta, 2, Rat(5, 4));
  CHECK(distance(theta, a, b) == Rat(3, 4));
  // around the far side when shorter: points near opposite ends of the
  // length-3 edge
  Point c = Point::on_edge(theta, 2, Rat(1, 4));
  Point d = Point::on_edge(theta, 2, Rat(11, 4));
  CHECK(distance(theta, c, d) == Rat(3, 2));  // 1/4 + 1 + 1/4 via edge 0
}

TEST_CASE("distance satisfies metric laws on random points") {
  std::mt19937 rng(5);
  MetricGraph p = prism(1, 2, 4);
  auto random_point = [&](std::mt19937& r) {
    int e = std::uniform_int_distribution<int>(0, p.g.num_edges() - 1)(r);
    int num = std::uniform_int_distribution<int>(0, 4)(r);
    Rat off = p.len(e) * Rat(num, 4);
    return Point::on_edge(p, e, off);
  };
  for (int trial = 0; trial < 25; ++trial) {
    Point a = random_point(rng), b = random_point(rng), c = random_point(rng);
    CHECK(distance(p, a, b) == distance(p, b, a));
    CHECK(distance(p, a, c) <= distance(p, a, b) + distance(p, b, c));
    CHECK((distance(p, a, b) == 0) == (a == b));
  }
}

TEST_CASE("distance agrees with exhaustive path search between vertices") {
  MetricGraph p = prism(1, 2, 4);
  for (int s = 0; s < p.g.num_vertices(); ++s)
    for (int t = 0; t < p.g.num_vertices(); ++t) {
      auto expect = oracles::brute_distance(p.g, p.length, s, t);
      REQUIRE(expect.has_value());
      CHECK(distance(p, Point::at_vertex(s), Point::at_vertex(t)) == *expect);
    }
}

TEST_CASE("attach_tree") {
  MetricGraph base = banana({1, 1, 1});
  MetricGraph tree;
  tree.g.add_vertex("r", 0);
  tree.g.add_vertex("x", 0);
  tree.g.add_edge("t", 0, 1);
  tree.length.push_back(Rat(1, 2));

  Point at = Point::on_edge(base, 0, Rat(1, 2));
  TreeAttachment att = attach_tree(base, at, tree, 0, "glue_");
  CHECK(att.graph.g.num_vertices() == 4);  // u, v, split point, leaf tip
  CHECK(att.graph.g.num_edges() == 5);
  CHECK(genus(att.graph) == genus(base));
  // canonical models agree
  Retraction c1 = canonical_model(att.graph);
  Retraction c2 = canonical_model(base);
  CHECK(are_isomorphic(c1.core.g, c2.core.g));
  // retraction sends the glued tree to the attachment point
  Point tip = Point::at_vertex(att.new_vertices.front());
  CHECK(att.retract_to_base.map_point(att.graph, tip) ==
        Point::at_vertex(att.attach_vertex));

  MetricGraph not_tree = banana({1, 1});
  CHECK_THROWS_AS(attach_tree(base, at, not_tree, 0, "x_"), Error);
}

TEST_CASE("refine then canonical returns the original canonical model") {
  MetricGraph p = prism(1, 2, 4);
  Retraction before = canonical_model(p);
  Refinement r = refine_at(p, {Point::on_edge(p, 2, Rat(1, 3)),
                               Point::on_edge(p, 4, Rat(1, 2))});
  Retraction after = canonical_model(r.fine);
  CHECK(are_isomorphic(before.core.g, after.core.g));
  std::multiset<Rat> l1(before.core.length.begin(), before.core.length.end());
  std::multiset<Rat> l2(after.core.length.begin(), after.core.length.end());
  CHECK(l1 == l2);
}
