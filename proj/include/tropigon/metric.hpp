#pragma once

#include "tropigon/graph.hpp"
#include "tropigon/rational.hpp"

#include <compare>
#include <map>
#include <optional>
#include <vector>

namespace tropigon {

// A model of a metric graph: combinatorial graph plus exact positive edge
// lengths. Weights in the underlying graph are kept (they are 0 unless the
// metric graph is part of a tropical curve) but play no metric role.
struct MetricGraph {
  WeightedGraph g;
  std::vector<Rat> length;  // per edge index, > 0

  void validate() const;
  const Rat& len(int e) const { return length[e]; }
};

// A point of the metric space: a vertex, or an interior position on an
// edge measured from the edge's first end (the stored endpoint `u`).
// Construction normalizes endpoint offsets to vertex form, so equality of
// points is plain field equality.
struct Point {
  int vertex = -1;
  int edge = -1;
  Rat offset;  // 0 < offset < length(edge) when edge >= 0

  static Point at_vertex(int v) {
    Point p;
    p.vertex = v;
    return p;
  }
  static Point on_edge(const MetricGraph& m, int e, const Rat& off);

  bool is_vertex() const { return vertex >= 0; }

  friend bool operator==(const Point& a, const Point& b) {
    return a.vertex == b.vertex && a.edge == b.edge && a.offset == b.offset;
  }
  friend bool operator<(const Point& a, const Point& b) {
    if (a.is_vertex() != b.is_vertex()) return a.is_vertex();  // vertices first
    if (a.is_vertex()) return a.vertex < b.vertex;
    if (a.edge != b.edge) return a.edge < b.edge;
    return a.offset < b.offset;
  }
};

std::string point_to_string(const MetricGraph& m, const Point& p);

// Refinement of a model at a finite point set: every interior point in the
// set becomes a vertex. Keeps both directions of the correspondence.
struct Refinement {
  MetricGraph coarse;
  MetricGraph fine;
  std::vector<Point> fine_vertex_origin;  // fine vertex -> coarse point
  // fine edge -> (coarse edge, a, b): the fine edge covers [a, b] of the
  // coarse edge with its first end at offset a. a < b always.
  struct Span {
    int coarse_edge;
    Rat a, b;
  };
  std::vector<Span> fine_edge_span;
  std::vector<std::vector<int>> pieces;  // coarse edge -> fine edges in order

  Point to_fine(const Point& coarse_pt) const;
  Point to_coarse(const Point& fine_pt) const;
};

Refinement refine_at(const MetricGraph& m, std::vector<Point> pts);

// Point-level description of how a metric graph maps onto a deformation
// retract of itself (canonical model, core after removing trees, ...).
// Vertices of the ambient model map to points of the core; an ambient edge
// either retracts to a single core point or runs through a path of core
// edge intervals whose lengths add up to its own length.
struct Retraction {
  MetricGraph core;
  std::vector<Point> vertex_image;  // ambient vertex -> core point
  struct Seg {
    int core_edge;
    Rat a, b;              // interval of core_edge covered, a < b
    bool flipped = false;  // ambient direction runs b -> a
  };
  struct EdgeImage {
    bool collapsed = false;
    Point target;           // when collapsed
    std::vector<Seg> path;  // otherwise, consecutive along the ambient edge
  };
  std::vector<EdgeImage> edge_image;

  Point map_point(const MetricGraph& ambient, const Point& p) const;
};

// Inverse of a retraction on the retained part: the ambient point that the
// given core point corresponds to. Errors if nothing maps there (cannot
// happen for retractions produced by this library).
Point lift_point(const MetricGraph& ambient, const Retraction& ret,
                 const Point& core_pt);

// True when the ambient point survives into the core (it is not on a
// retracted tree), i.e. map_point is injective at p.
bool is_retained(const MetricGraph& ambient, const Retraction& ret, const Point& p);

int genus(const MetricGraph& m);

// Canonical model: no valence-1 and no valence-2 points remain. Requires
// genus >= 2. Returns the model and the retraction of the input onto it.
Retraction canonical_model(const MetricGraph& m);

// Canonical loopless model: refinement of the canonical model with a
// vertex at the midpoint of each loop.
Retraction canonical_loopless_model(const MetricGraph& m);

Rat distance(const MetricGraph& m, const Point& a, const Point& b);

// Tropical modification: glue a rooted metric tree at a point. The result
// contains the original model (refined at the attachment point when it is
// interior); new ids get the given prefix.
struct TreeAttachment {
  MetricGraph graph;
  Retraction retract_to_base;        // retraction onto the (refined) base
  std::vector<int> new_vertices;     // indices in `graph` of glued tree vertices
  std::vector<int> new_edges;
  int attach_vertex = -1;            // image of the tree root
};
TreeAttachment attach_tree(const MetricGraph& m, const Point& at,
                           const MetricGraph& tree, int tree_root,
                           const std::string& id_prefix);

bool is_metric_tree(const MetricGraph& m);

}  // namespace tropigon
