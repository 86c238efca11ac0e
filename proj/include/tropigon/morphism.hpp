#pragma once

#include "tropigon/divisor.hpp"
#include "tropigon/metric.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tropigon {

// Indexed morphism of (weighted multi)graphs, optionally of metric graphs
// when both length vectors are present. Each source edge maps either to a
// target edge (index mu >= 1) or to a target vertex (mu = 0, the edge is
// contracted). Edge images record an orientation flag so that parallel
// target edges and loops are unambiguous: flip=false sends the source
// edge's first end to the target edge's first end.
struct IndexedMorphism {
  WeightedGraph src, tgt;
  std::optional<std::vector<Rat>> src_len, tgt_len;

  struct EdgeImage {
    int edge = -1;    // target edge, or
    int vertex = -1;  // target vertex (contracted)
    bool flip = false;
    bool contracted() const { return vertex >= 0; }
  };
  std::vector<int> vertex_map;       // per source vertex
  std::vector<EdgeImage> edge_map;   // per source edge
  std::vector<int> mu;               // per source edge, 0 iff contracted

  bool metric() const { return src_len.has_value() && tgt_len.has_value(); }
  MetricGraph source_metric() const;
  MetricGraph target_metric() const;

  // Image of a source point (metric only): linear along each edge with
  // stretch factor mu.
  Point map_point(const Point& p) const;
};

struct MorphismReport {
  bool structurally_valid = false;
  std::vector<std::string> violations;

  bool harmonic = false;
  bool non_degenerate = false;
  std::optional<int> degree;  // present iff harmonic and the target has edges

  // m_phi(x) per source vertex: the per-target-edge index sums. For a
  // harmonic morphism all entries of a row agree; `local_degree` then holds
  // the common value (0 when the image vertex has no incident edges).
  std::vector<std::map<int, int>> fiber_counts;
  std::vector<int> local_degree;  // meaningful when harmonic

  // Metric side (only when both models carry lengths): mu(e) * l(e) must
  // equal l'(phi(e)) for every non-contracted edge.
  bool metric_consistent = true;
  std::vector<std::string> metric_violations;
};

// Validates the structure (endpoint compatibility, index/contraction
// matching) and evaluates harmonicity, non-degeneracy, degree and metric
// consistency. Structural failure throws; mathematical verdicts are
// reported in the result.
MorphismReport check_morphism(const IndexedMorphism& phi);

// Horizontal multiplicity at a point: m_phi at vertices, 0 on contracted
// interiors, mu(e) on non-contracted interiors. Requires a harmonic phi.
int horizontal_multiplicity(const IndexedMorphism& phi, const Point& x);

// Pullback of a divisor on the target: (phi^* D')(x) = m_phi(x) D'(phi(x)).
// Requires phi metric and harmonic.
Divisor pullback(const IndexedMorphism& phi, const Divisor& on_target);

// Tropical modification with no contractions (same degree, non-degenerate,
// harmonic): each contracted edge is split at its midpoint and compensated
// with leaves of half its length on the fiber, matched by one leaf on the
// target. Requires a non-degenerate harmonic metric morphism.
IndexedMorphism remove_contractions(const IndexedMorphism& phi);

// Local Riemann-Hurwitz balance at a source vertex:
//   2 - 2w(v) = m(v) * (2 - 2w(phi(v))) - sum_{e at v} (mu(e) - 1).
// Returns (holds, defect = RHS - LHS). m(v) is taken over the first
// incident target edge at phi(v) (any of them for a harmonic morphism).
std::pair<bool, int> riemann_hurwitz_local(const IndexedMorphism& phi, int v);

}  // namespace tropigon
