#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tropigon {

// Finite connected multigraph with loops and non-negative integer vertex
// weights. Vertices and edges carry string ids (stable across
// serialization); all algorithms work on dense indices.
//
// Edges are stored with an ordered endpoint pair (u, v). The order is not
// structural for the graph itself but fixes the "first end" used by the
// metric layer to measure offsets, and gives loops an orientation.
struct WeightedGraph {
  struct Vertex {
    std::string id;
    int weight = 0;
  };
  struct Edge {
    std::string id;
    int u = -1;
    int v = -1;
  };

  std::vector<Vertex> vertices;
  std::vector<Edge> edges;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  int add_vertex(std::string id, int weight = 0);
  int add_edge(std::string id, int u, int v);

  int vertex_index(const std::string& id) const;   // -1 if absent
  int edge_index(const std::string& id) const;     // -1 if absent

  bool is_loop(int e) const { return edges[e].u == edges[e].v; }
  int other_end(int e, int v) const;

  // Incident edges; loops appear twice. val(v) = ends_at(v).size().
  std::vector<int> ends_at(int v) const;
  int valence(int v) const;

  // Throws Error on duplicate ids, dangling endpoints, negative weights
  // or disconnectedness.
  void validate() const;

  bool connected() const;
};

int betti1(const WeightedGraph& g);
int genus(const WeightedGraph& g);

// Result of contracting an edge set, with index maps into the new graph.
// Contracted edges map to -1. Merged vertices keep the lexicographically
// smallest id among their group.
struct Contraction {
  WeightedGraph graph;
  std::vector<int> vertex_map;  // old vertex -> new vertex
  std::vector<int> edge_map;    // old edge -> new edge, -1 if contracted
};

// Weighted contraction: a contracted loop adds 1 to the merged weight,
// a non-loop edge merges w(u)+w(v); more generally each independent cycle
// inside the contracted set contributes 1. Genus is preserved.
Contraction contract_edges(const WeightedGraph& g, const std::set<int>& s);

// A graph is stable when every weight-0 vertex has valence >= 3.
bool is_stable(const WeightedGraph& g);

// Stable model: successively contract leaf edges at weight-0 valence-1
// vertices and one of the two edges at weight-0 valence-2 vertices.
// Requires genus >= 2.
Contraction stable_model(const WeightedGraph& g);

// Loopless model: each loop is replaced by two parallel edges through a
// fresh weight-0 vertex.
struct LooplessModel {
  WeightedGraph graph;
  // For every original loop e: the new midpoint vertex and the two new
  // half edges (first half carries the loop's first end).
  struct Split {
    int old_edge;
    int mid_vertex;
    int first_half;
    int second_half;
  };
  std::vector<int> edge_map;  // old edge -> new edge, -1 for split loops
  std::vector<Split> splits;
};
LooplessModel loopless_model(const WeightedGraph& g);

// Minimum number of edges whose removal disconnects the graph, computed
// by unit-capacity max-flow from a fixed vertex to every other vertex.
// Loops never contribute. For graphs with fewer than two vertices there
// is nothing to disconnect and the result is INT_MAX.
int edge_connectivity(const WeightedGraph& g);

// A minimal disconnecting edge set together with one side of the split.
struct EdgeCut {
  std::vector<int> edges;   // sorted edge indices
  std::vector<int> side;    // sorted vertex indices of one component side
};

// All minimal 3-element disconnecting sets (every 3-edge cut in the sense
// of the k-edge-cut definition: removal disconnects, no proper subset
// does).
std::vector<EdgeCut> enumerate_3_edge_cuts(const WeightedGraph& g);

// Canonical certificate of the weighted multigraph, optionally together
// with a partition of the edge set (edge_classes[e] = class id). Two
// graphs have equal certificates iff they are isomorphic as weighted
// multigraphs (respecting the edge partition when given, up to renaming
// of class ids).
std::string canonical_certificate(const WeightedGraph& g,
                                  const std::vector<int>* edge_classes = nullptr);

bool are_isomorphic(const WeightedGraph& a, const WeightedGraph& b);

}  // namespace tropigon
