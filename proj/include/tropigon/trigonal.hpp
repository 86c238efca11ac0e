#pragma once

#include "tropigon/divisor.hpp"
#include "tropigon/morphism.hpp"

#include <map>
#include <optional>
#include <vector>

namespace tropigon {

// Admissible representative of a degree-3 rank->=1 class with respect to a
// canonical vertex: base + x1 + x2 with x1, x2 never interior to a common
// canonical edge. Unique per base on 3-edge connected graphs; distinct
// representatives have disjoint supports, so one divisor may serve several
// bases.
struct AdmissibleRep {
  std::vector<int> base_vertices;  // canonical vertices whose rep this is
  Divisor divisor;                 // on the canonical model
};

// Degree-3 cover of a metric tree built from a divisor class. The source
// of `phi` is a refinement of the canonical model, possibly with leaves
// glued on (loop handling); `source_to_canonical` collapses those.
struct TrigonalCover {
  MetricGraph canonical;              // the model the cover hangs under
  // retraction from the ambient input model; absent when `canonical` is
  // not a retract of the input (small_core_cover on looped graphs)
  std::optional<Retraction> input_to_canonical;
  IndexedMorphism phi;                // modified source -> metric tree
  Retraction source_to_canonical;
  std::map<int, Divisor> rep_of_tree_vertex;  // canonical coords; main pipeline only
};

struct SmallCaseCertificate {
  int vertex_count;  // |V(G_-)|: 2 or 3
  Divisor witness;   // on the input model, degree 3, rank >= 1
};

// The unique admissible representative of d with respect to the canonical
// vertex with index `x` (in the canonical model of m). Requires
// edge-connectivity >= 3 and rank(d) >= 1.
AdmissibleRep admissible_rep(const MetricGraph& m, const Divisor& d, int x);

// The set A_D: one representative per canonical vertex, deduplicated by
// divisor equality. Distinct members have disjoint supports.
std::vector<AdmissibleRep> all_admissible_reps(const MetricGraph& m, const Divisor& d);

// Three equal-length edges joining two consecutive representatives,
// described on the support refinement (G_D, l_D).
struct ConsecutiveCut {
  std::vector<int> fine_edges;  // in the refinement returned alongside
  Rat length;
};

// The support refinement of the canonical model together with the
// ownership of each refined vertex by a representative.
struct SupportRefinement {
  Refinement gd;            // coarse = canonical model, fine = (G_D, l_D)
  std::vector<int> owner;   // fine vertex -> representative index
};

SupportRefinement support_refinement(const MetricGraph& canonical,
                                     const std::vector<AdmissibleRep>& reps);

// Returns the connecting cut if the two representatives are consecutive,
// nullopt if no edge joins them; throws Error(Internal) if the structural
// guarantees (exactly three edges, equal length, disconnecting) fail.
std::optional<ConsecutiveCut> consecutive(const SupportRefinement& sr, int i, int j);

// Theorem pipeline for loopless canonical models. Requires 3-edge
// connectivity, deg(d) = 3, rank(d) >= 1. Canonical models on two or three
// vertices go through the small-core construction.
TrigonalCover build_trigonal_cover(const MetricGraph& m, const Divisor& d);

// General pipeline: builds the cover of the loop-free part and extends it
// over each loop with a midpoint and a leaf placed by the class of d.
// Delegates to build_trigonal_cover when there are no loops.
TrigonalCover build_trigonal_cover_with_loops(const MetricGraph& m, const Divisor& d);

// Witness divisor for canonical loopless models on 2 or 3 vertices.
SmallCaseCertificate small_case_witness(const MetricGraph& m);

// Cover of the loop-free core when its canonical model has 2 or 3
// vertices: parallel-edge classes (with the long edges split at the
// common length) map onto single tree edges, the rest is contracted.
// Errors on graphs outside these families.
TrigonalCover small_core_cover(const MetricGraph& m, const Divisor& d);

struct RoundtripReport {
  bool pass = false;
  std::vector<std::string> checks;    // one line per verified property
  std::vector<std::string> failures;
};

// End-to-end verification: builds the cover, re-checks harmonicity, the
// three-equal-edge fiber structure over every tree edge, the rank of the
// pullback of a generic tree point on the modified source and of its
// push-down to the input graph, and the fiber/representative match.
RoundtripReport verify_equivalence_roundtrip(const MetricGraph& m, const Divisor& d);

}  // namespace tropigon
