#pragma once

#include "tropigon/morphism.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tropigon {

// Combinatorial trigonal type: a stable 3-edge connected weighted graph
// (G, w) together with a non-degenerate harmonic degree-3 morphism phi
// from a carrier graph to a tree. The carrier stabilizes to G with its
// weights materialized as loops; every tree vertex has a stable vertex in
// its fiber. The stable side is always derived from the carrier.
struct TrigonalType {
  IndexedMorphism phi;  // carrier -> tree, combinatorial (no lengths)

  WeightedGraph stable;                       // (G, w)
  std::vector<char> carrier_vertex_stable;    // carrier vertex is a vertex of G
  std::vector<int> carrier_edge_in_stable;    // stable edge index or -1
  std::vector<std::vector<int>> stable_edge_pieces;  // per stable edge, in order

  const WeightedGraph& carrier() const { return phi.src; }
  const WeightedGraph& tree() const { return phi.tgt; }
};

// Derives the stable side and validates every type axiom (harmonic,
// non-degenerate, degree 3, fiber condition, stability, 3-edge
// connectivity of the stable part). Throws Error on violation.
TrigonalType make_trigonal_type(IndexedMorphism phi);

// The equivalence classes ~_phi on the carrier edges (one class per tree
// edge fiber, a singleton per contracted edge) and the induced relations
// on the stable edges.
struct EdgeRelation {
  std::vector<int> carrier_class;  // per carrier edge
  int num_classes = 0;
  std::vector<std::vector<int>> class_members;
  // stable-edge comparisons induced by the classes: e1 =_phi e2 when both
  // are single pieces of one class; e1 <=_phi e2 when e1 is a single piece
  // whose class also has a member inside e2.
  std::vector<std::pair<int, int>> stable_eq;
  std::vector<std::pair<int, int>> stable_leq;  // strict-containment pairs
};
EdgeRelation edge_relation(const TrigonalType& tt);

// Weighted contraction of a union of ~_phi classes, following the
// case analysis of the contraction proposition (loops gain weight,
// contractions that spawn loops get midpoint + leaf decorations matched by
// tree leaves). Genus is preserved.
TrigonalType phi_contract(const TrigonalType& tt, const std::set<int>& class_ids);

// Length-parameter cone of the type: one parameter per ~_phi class, mapped
// to stable edge lengths by summing over pieces; the dimension is the rank
// of that map.
struct ConeDescriptor {
  int num_classes = 0;
  std::vector<std::vector<int>> matrix;  // per stable edge, per class
  int dimension = 0;
};
ConeDescriptor cone_descriptor(const TrigonalType& tt);

// Isomorphism certificate of the type: carrier with weights and the fiber
// partition, up to renaming. Equal certificates = isomorphic types.
std::string type_certificate(const TrigonalType& tt);

// All trees with n vertices and maximum valence max_valence, up to
// isomorphism.
std::vector<WeightedGraph> enumerate_trees(int n, int max_valence = 3);

// A 3-ladder: three copies of a tree joined by one vertical edge over each
// valence-2 vertex and two non-parallel vertical edges over each leaf.
struct ThreeLadder {
  WeightedGraph tree;
  std::vector<int> leaf_center;            // per tree vertex: centre copy (0..2), -1
  std::vector<std::pair<int, int>> mid_pair;  // per tree vertex: copy pair, (-1,-1)
  TrigonalType type;                       // carrier G_T with phi_T
};

// All 3-ladders over the tree, up to isomorphism of the fibred carrier.
// For path trees with at least two valence-2 vertices, assignments whose
// vertical edges all join the same two copies are excluded.
std::vector<ThreeLadder> build_3_ladders(const WeightedGraph& tree);

struct Cell {
  TrigonalType type;
  int dimension = 0;
  int tree_vertices = 0;
};

// Maximal cells of the genus-g moduli of 3-edge connected trigonal tropical
// curves: stabilized 3-ladders over all trees with g vertices, deduplicated
// by type certificate. jobs > 1 distributes the per-tree work.
std::vector<Cell> maximal_cells(int g, int jobs = 1);

struct FacetReport {
  std::vector<std::vector<std::string>> facets;  // per cell: facet certificates
  std::vector<std::pair<int, int>> adjacent;     // cells sharing a facet type
  bool connected = false;
};
FacetReport facets_and_adjacency(const std::vector<Cell>& cells);

// The contraction-free modification of the type's morphism, with unit
// lengths, as used for the admissible-cover certification.
IndexedMorphism admissible_cover_morphism(const TrigonalType& tt);

// Local Riemann-Hurwitz equality at every vertex of valence != 2 of the
// (modified) source. Valence-2 points carry no vertex in any canonical
// model; the fold midpoints introduced by contraction removal are exactly
// the valence-2 vertices here.
bool rh_certified(const IndexedMorphism& phi);

bool certify_admissible(const TrigonalType& tt);

}  // namespace tropigon
