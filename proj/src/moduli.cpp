#include "tropigon/moduli.hpp"

#include "tropigon/error.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

namespace tropigon {

namespace {

struct StableDerivation {
  WeightedGraph stable;
  std::vector<char> vertex_flag;
  std::vector<int> edge_in_stable;
  std::vector<std::vector<int>> pieces;
};

// Strips weight-0 valence-1 vertices, then reads the stable graph off the
// remaining core: branch points (weight > 0 or core valence >= 3) are the
// stable vertices, maximal chains through valence-2 points the stable edges.
StableDerivation derive_stable(const WeightedGraph& g) {
  int n = g.num_vertices(), m = g.num_edges();
  std::vector<char> edge_alive(m, 1);
  auto alive_valence = [&](int v) {
    int val = 0;
    for (int e = 0; e < m; ++e) {
      if (!edge_alive[e]) continue;
      if (g.edges[e].u == v) ++val;
      if (g.edges[e].v == v) ++val;
    }
    return val;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      if (g.vertices[v].weight != 0 || alive_valence(v) != 1) continue;
      for (int e = 0; e < m; ++e)
        if (edge_alive[e] && (g.edges[e].u == v || g.edges[e].v == v)) {
          edge_alive[e] = 0;
          changed = true;
        }
    }
  }

  StableDerivation out;
  out.vertex_flag.assign(n, 0);
  std::vector<int> stable_vertex_of(n, -1);
  for (int v = 0; v < n; ++v) {
    int val = alive_valence(v);
    if (val == 0 && g.vertices[v].weight == 0) continue;  // stripped
    if (g.vertices[v].weight > 0 || val >= 3) {
      out.vertex_flag[v] = 1;
      stable_vertex_of[v] =
          out.stable.add_vertex(g.vertices[v].id, g.vertices[v].weight);
    }
  }
  if (out.stable.num_vertices() == 0)
    fail_structure("carrier has no branch points; it does not stabilize");

  out.edge_in_stable.assign(m, -1);
  // walk chains from each branch vertex along each unused alive end
  std::vector<char> end_used(2 * m, 0);
  for (int b = 0; b < n; ++b) {
    if (!out.vertex_flag[b]) continue;
    for (int e0 = 0; e0 < m; ++e0) {
      if (!edge_alive[e0]) continue;
      for (int side0 = 0; side0 < 2; ++side0) {
        int at = side0 == 0 ? g.edges[e0].u : g.edges[e0].v;
        if (at != b || end_used[2 * e0 + side0]) continue;
        std::vector<int> chain;
        int e = e0, side = side0;
        int cur = b;
        for (;;) {
          end_used[2 * e + side] = 1;
          int far_side = 1 - side;
          end_used[2 * e + far_side] = 1;
          chain.push_back(e);
          int next = far_side == 0 ? g.edges[e].u : g.edges[e].v;
          if (out.vertex_flag[next]) {
            int s = out.stable.add_edge("s" + std::to_string(out.stable.num_edges()),
                                        stable_vertex_of[b], stable_vertex_of[next]);
            out.pieces.push_back(chain);
            for (int ce : chain) out.edge_in_stable[ce] = s;
            break;
          }
          // continue through the unique other alive end at `next`
          int ne = -1, nside = -1;
          for (int f = 0; f < m; ++f) {
            if (!edge_alive[f]) continue;
            for (int fs = 0; fs < 2; ++fs) {
              int v = fs == 0 ? g.edges[f].u : g.edges[f].v;
              if (v == next && !(f == e) && !end_used[2 * f + fs] ) {
                ne = f;
                nside = fs;
              }
            }
          }
          if (ne < 0) fail_internal("chain walk stuck at a valence-2 point");
          e = ne;
          side = nside;
          cur = next;
        }
        (void)cur;
      }
    }
  }
  for (int e = 0; e < m; ++e)
    if (edge_alive[e] && out.edge_in_stable[e] < 0)
      fail_structure("carrier contains a cycle without branch points");
  return out;
}

}  // namespace

TrigonalType make_trigonal_type(IndexedMorphism phi) {
  phi.src.validate();
  phi.tgt.validate();
  if (betti1(phi.tgt) != 0) fail_pre("trigonal type target must be a tree");
  MorphismReport rep = check_morphism(phi);
  if (!rep.structurally_valid)
    fail_pre("trigonal type morphism is structurally invalid: " +
             (rep.violations.empty() ? std::string("?") : rep.violations[0]));
  if (!rep.harmonic || !rep.non_degenerate || rep.degree != 3)
    fail_pre("trigonal type needs a non-degenerate harmonic morphism of degree 3");

  TrigonalType tt;
  tt.phi = std::move(phi);
  StableDerivation der = derive_stable(tt.phi.src);
  tt.stable = std::move(der.stable);
  tt.carrier_vertex_stable = std::move(der.vertex_flag);
  tt.carrier_edge_in_stable = std::move(der.edge_in_stable);
  tt.stable_edge_pieces = std::move(der.pieces);

  if (!is_stable(tt.stable)) fail_internal("derived stable graph is not stable");
  if (genus(tt.stable) != genus(tt.phi.src))
    fail_internal("stabilization changed the genus");
  if (edge_connectivity(tt.stable) < 3)
    fail_pre("stable part of the trigonal type is not 3-edge connected");
  // fiber condition: every tree vertex sees a vertex of G, where loop
  // midpoints count as the distinguished point of their stable loop (the
  // decorated leaf fibers of looped graphs contain exactly those)
  auto anchors_fiber = [&](int v) {
    if (tt.carrier_vertex_stable[v]) return true;
    auto ends = tt.carrier().ends_at(v);
    if (ends.size() != 2) return false;
    int s1 = tt.carrier_edge_in_stable[ends[0]];
    int s2 = tt.carrier_edge_in_stable[ends[1]];
    return s1 >= 0 && s1 == s2 && tt.stable.is_loop(s1);
  };
  for (int t = 0; t < tt.tree().num_vertices(); ++t) {
    bool hit = false;
    for (int v = 0; v < tt.carrier().num_vertices() && !hit; ++v)
      if (tt.phi.vertex_map[v] == t && anchors_fiber(v)) hit = true;
    if (!hit)
      fail_pre("a tree vertex has no stable vertex in its fiber");
  }
  return tt;
}

EdgeRelation edge_relation(const TrigonalType& tt) {
  EdgeRelation er;
  int m = tt.carrier().num_edges();
  int t_edges = tt.tree().num_edges();
  er.carrier_class.assign(m, -1);
  int next_class = t_edges;
  for (int e = 0; e < m; ++e) {
    if (tt.phi.edge_map[e].contracted()) er.carrier_class[e] = next_class++;
    else er.carrier_class[e] = tt.phi.edge_map[e].edge;
  }
  er.num_classes = next_class;
  er.class_members.assign(er.num_classes, {});
  for (int e = 0; e < m; ++e) er.class_members[er.carrier_class[e]].push_back(e);

  int s_edges = tt.stable.num_edges();
  for (int s1 = 0; s1 < s_edges; ++s1) {
    if (tt.stable_edge_pieces[s1].size() != 1) continue;
    int c1 = er.carrier_class[tt.stable_edge_pieces[s1][0]];
    for (int s2 = 0; s2 < s_edges; ++s2) {
      if (s2 == s1) continue;
      bool single2 = tt.stable_edge_pieces[s2].size() == 1;
      bool contains = false;
      for (int piece : tt.stable_edge_pieces[s2])
        if (er.carrier_class[piece] == c1) contains = true;
      if (!contains) continue;
      if (single2) {
        if (s1 < s2) er.stable_eq.push_back({s1, s2});
      } else {
        er.stable_leq.push_back({s1, s2});
      }
    }
  }
  return er;
}

// ---------------------------------------------------------------------------
// phi-contraction

namespace {

struct LoopDecoration {
  int loop_edge;   // newly spawned loop in the contracted carrier
  int leaf_base;   // vertex carrying the compensating leaf
  int tree_at;     // tree vertex under the loop
};

// Contract `edges` (one ~ class) in the carrier and tree, decorate spawned
// loops. Local degrees are those of the uncontracted morphism.
IndexedMorphism contract_class(const IndexedMorphism& phi,
                               const std::vector<int>& cls,
                               const std::vector<int>& local_degree) {
  std::set<int> s(cls.begin(), cls.end());
  bool fiber_class = !phi.edge_map[cls[0]].contracted();

  Contraction cg = contract_edges(phi.src, s);
  Contraction ct;
  if (fiber_class) {
    int t = phi.edge_map[cls[0]].edge;
    ct = contract_edges(phi.tgt, {t});
  } else {
    ct.graph = phi.tgt;
    ct.vertex_map.resize(phi.tgt.num_vertices());
    std::iota(ct.vertex_map.begin(), ct.vertex_map.end(), 0);
    ct.edge_map.resize(phi.tgt.num_edges());
    std::iota(ct.edge_map.begin(), ct.edge_map.end(), 0);
  }

  IndexedMorphism out;
  out.src = cg.graph;
  out.tgt = ct.graph;
  out.vertex_map.assign(out.src.num_vertices(), -1);
  for (int v = 0; v < phi.src.num_vertices(); ++v) {
    int nv = cg.vertex_map[v];
    int img = ct.vertex_map[phi.vertex_map[v]];
    if (out.vertex_map[nv] >= 0 && out.vertex_map[nv] != img)
      fail_internal("contracted class merges vertices with different images");
    out.vertex_map[nv] = img;
  }
  out.edge_map.assign(out.src.num_edges(), {});
  out.mu.assign(out.src.num_edges(), 0);
  for (int e = 0; e < phi.src.num_edges(); ++e) {
    int ne = cg.edge_map[e];
    if (ne < 0) continue;
    const auto& im = phi.edge_map[e];
    if (im.contracted()) {
      out.edge_map[ne] = {-1, ct.vertex_map[im.vertex], false};
      out.mu[ne] = 0;
    } else {
      int nt = ct.edge_map[im.edge];
      if (nt < 0) fail_internal("surviving carrier edge lost its tree edge");
      out.edge_map[ne] = {nt, -1, im.flip};
      out.mu[ne] = phi.mu[e];
    }
  }

  // spawned loops: surviving edges whose endpoints merged together and
  // which were not loops before. The compensation leaf sits at the merged
  // vertex when its local level is 3, otherwise at the level-(3 - L)
  // vertex of the same fiber. For a fiber-class contraction the raw sum of
  // member degrees counts both sides of the contracted tree edge, so the
  // level is half of it.
  std::vector<LoopDecoration> decorations;
  std::vector<int> msum(out.src.num_vertices(), 0);
  std::vector<int> group_size(out.src.num_vertices(), 0);
  for (int v = 0; v < phi.src.num_vertices(); ++v) {
    msum[cg.vertex_map[v]] += local_degree[v];
    ++group_size[cg.vertex_map[v]];
  }
  auto level = [&](int v) {
    return (fiber_class && group_size[v] > 1) ? msum[v] / 2 : msum[v];
  };
  for (int e = 0; e < phi.src.num_edges(); ++e) {
    int ne = cg.edge_map[e];
    if (ne < 0 || phi.src.is_loop(e) || !out.src.is_loop(ne)) continue;
    int p = out.src.edges[ne].u;
    int tree_at = out.vertex_map[p];
    int base = p;
    if (level(p) != 3) {
      base = -1;
      for (int z = 0; z < out.src.num_vertices(); ++z) {
        if (z == p || out.vertex_map[z] != tree_at) continue;
        if (level(z) == 3 - level(p)) {
          base = z;
          break;
        }
      }
      if (base < 0)
        fail_internal("no vertex available to carry a loop compensation leaf");
    }
    decorations.push_back({ne, base, tree_at});
  }

  int counter = 0;
  for (const auto& dec : decorations) {
    std::string tag = "d" + std::to_string(counter++);
    int loop_v = out.src.edges[dec.loop_edge].u;
    int tip_t = out.tgt.add_vertex(tag + ".t", 0);
    int te = out.tgt.add_edge(tag + ".leaf", dec.tree_at, tip_t);
    // split the loop at a midpoint vertex
    int mid = out.src.add_vertex(tag + ".mid", 0);
    out.vertex_map.push_back(tip_t);
    std::string loop_id = out.src.edges[dec.loop_edge].id;
    out.src.edges[dec.loop_edge] = {loop_id + ".a", loop_v, mid};
    out.edge_map[dec.loop_edge] = {te, -1, false};
    out.mu[dec.loop_edge] = 1;
    out.src.add_edge(loop_id + ".b", mid, loop_v);
    out.edge_map.push_back({te, -1, true});
    out.mu.push_back(1);
    int tip = out.src.add_vertex(tag + ".tip", 0);
    out.vertex_map.push_back(tip_t);
    out.src.add_edge(tag + ".le", dec.leaf_base, tip);
    out.edge_map.push_back({te, -1, false});
    out.mu.push_back(1);
  }
  return out;
}

}  // namespace

TrigonalType phi_contract(const TrigonalType& tt, const std::set<int>& class_ids) {
  if (class_ids.empty()) return tt;
  EdgeRelation er = edge_relation(tt);
  for (int c : class_ids)
    if (c < 0 || c >= er.num_classes) fail_pre("unknown edge class");
  int before = genus(tt.phi.src);

  // contract one class, rebuild, repeat (classes are tracked by a member
  // edge id so that indices survive the rebuilds)
  TrigonalType cur = tt;
  std::vector<std::string> todo;
  for (int c : class_ids)
    todo.push_back(tt.carrier().edges[er.class_members[c][0]].id);
  for (const std::string& marker : todo) {
    int e = cur.carrier().edge_index(marker);
    if (e < 0) fail_pre("selected classes overlap after earlier contractions");
    EdgeRelation cur_er = edge_relation(cur);
    MorphismReport rep = check_morphism(cur.phi);
    IndexedMorphism next = contract_class(
        cur.phi, cur_er.class_members[cur_er.carrier_class[e]], rep.local_degree);
    cur = make_trigonal_type(std::move(next));
  }
  if (genus(cur.phi.src) != before)
    fail_internal("phi-contraction changed the genus");
  return cur;
}

// ---------------------------------------------------------------------------

ConeDescriptor cone_descriptor(const TrigonalType& tt) {
  EdgeRelation er = edge_relation(tt);
  ConeDescriptor cone;
  cone.num_classes = er.num_classes;
  int rows = tt.stable.num_edges();
  cone.matrix.assign(rows, std::vector<int>(er.num_classes, 0));
  for (int s = 0; s < rows; ++s)
    for (int piece : tt.stable_edge_pieces[s])
      cone.matrix[s][er.carrier_class[piece]] += 1;

  // exact rank
  std::vector<std::vector<Rat>> a(rows, std::vector<Rat>(er.num_classes));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < er.num_classes; ++j) a[i][j] = cone.matrix[i][j];
  int rank = 0;
  for (int col = 0; col < er.num_classes && rank < rows; ++col) {
    int pivot = -1;
    for (int i = rank; i < rows; ++i)
      if (a[i][col] != 0) {
        pivot = i;
        break;
      }
    if (pivot < 0) continue;
    std::swap(a[rank], a[pivot]);
    for (int i = 0; i < rows; ++i) {
      if (i == rank || a[i][col] == 0) continue;
      Rat f = a[i][col] / a[rank][col];
      for (int j = col; j < er.num_classes; ++j) a[i][j] -= f * a[rank][j];
    }
    ++rank;
  }
  cone.dimension = rank;
  return cone;
}

std::string type_certificate(const TrigonalType& tt) {
  EdgeRelation er = edge_relation(tt);
  return canonical_certificate(tt.carrier(), &er.carrier_class);
}

// ---------------------------------------------------------------------------
// Trees and ladders

std::vector<WeightedGraph> enumerate_trees(int n, int max_valence) {
  if (n < 2) fail_pre("tree enumeration starts at two vertices");
  WeightedGraph k2;
  k2.add_vertex("v0", 0);
  k2.add_vertex("v1", 0);
  k2.add_edge("e0", 0, 1);
  std::vector<WeightedGraph> level = {k2};
  for (int size = 3; size <= n; ++size) {
    std::vector<WeightedGraph> next;
    std::set<std::string> seen;
    for (const WeightedGraph& t : level) {
      for (int v = 0; v < t.num_vertices(); ++v) {
        if (t.valence(v) + 1 > max_valence) continue;
        WeightedGraph bigger = t;
        int leaf = bigger.add_vertex("v" + std::to_string(size - 1), 0);
        bigger.add_edge("e" + std::to_string(size - 2), v, leaf);
        std::string cert = canonical_certificate(bigger);
        if (seen.insert(cert).second) next.push_back(std::move(bigger));
      }
    }
    level = std::move(next);
  }
  return level;
}

std::vector<ThreeLadder> build_3_ladders(const WeightedGraph& tree) {
  int n = tree.num_vertices();
  for (int v = 0; v < n; ++v)
    if (tree.valence(v) > 3) fail_pre("3-ladders require tree valences <= 3");
  std::vector<int> leaves, mids;
  for (int v = 0; v < n; ++v) {
    if (tree.valence(v) == 1) leaves.push_back(v);
    if (tree.valence(v) == 2) mids.push_back(v);
  }
  bool is_path = mids.size() + leaves.size() == static_cast<size_t>(n);
  static const std::pair<int, int> kPairs[3] = {{0, 1}, {0, 2}, {1, 2}};

  std::vector<ThreeLadder> out;
  std::set<std::string> seen;
  int slots = static_cast<int>(leaves.size() + mids.size());
  std::vector<int> choice(slots, 0);
  for (;;) {
    // decode the assignment
    std::vector<int> leaf_center(n, -1);
    std::vector<std::pair<int, int>> mid_pair(n, {-1, -1});
    for (size_t i = 0; i < leaves.size(); ++i) leaf_center[leaves[i]] = choice[i];
    for (size_t i = 0; i < mids.size(); ++i)
      mid_pair[mids[i]] = kPairs[choice[leaves.size() + i]];

    bool excluded = false;
    if (is_path && mids.size() >= 2) {
      bool all_same = true;
      for (size_t i = 1; i < mids.size(); ++i)
        if (mid_pair[mids[i]] != mid_pair[mids[0]]) all_same = false;
      excluded = all_same;
    }
    if (!excluded) {
      // assemble the carrier: vertex (copy i, tree vertex j) = 3*j + i
      IndexedMorphism phi;
      phi.tgt = tree;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < 3; ++i) {
          phi.src.add_vertex("c" + std::to_string(i) + "_" + tree.vertices[j].id, 0);
          phi.vertex_map.push_back(j);
        }
      for (int k = 0; k < tree.num_edges(); ++k) {
        const auto& ed = tree.edges[k];
        for (int i = 0; i < 3; ++i) {
          phi.src.add_edge("c" + std::to_string(i) + "_" + tree.edges[k].id,
                           3 * ed.u + i, 3 * ed.v + i);
          phi.edge_map.push_back({k, -1, false});
          phi.mu.push_back(1);
        }
      }
      int vert_count = 0;
      auto add_vertical = [&](int j, int ci, int cj) {
        phi.src.add_edge("w" + std::to_string(vert_count++), 3 * j + ci, 3 * j + cj);
        phi.edge_map.push_back({-1, j, false});
        phi.mu.push_back(0);
      };
      for (int j : leaves) {
        int c = leaf_center[j];
        add_vertical(j, c, (c + 1) % 3);
        add_vertical(j, c, (c + 2) % 3);
      }
      for (int j : mids) add_vertical(j, mid_pair[j].first, mid_pair[j].second);

      TrigonalType tt = make_trigonal_type(std::move(phi));
      std::string cert = type_certificate(tt);
      if (seen.insert(cert).second) {
        ThreeLadder ladder;
        ladder.tree = tree;
        ladder.leaf_center = leaf_center;
        ladder.mid_pair = mid_pair;
        ladder.type = std::move(tt);
        out.push_back(std::move(ladder));
      }
    }
    // increment the mixed-radix counter
    int pos = 0;
    for (; pos < slots; ++pos) {
      if (++choice[pos] < 3) break;
      choice[pos] = 0;
    }
    if (pos == slots) break;
  }
  return out;
}

std::vector<Cell> maximal_cells(int g, int jobs) {
  if (g < 3) fail_pre("maximal cells are defined for genus >= 3");
  std::vector<WeightedGraph> trees = enumerate_trees(g, 3);

  auto cells_of_tree = [](const WeightedGraph& t) {
    std::vector<Cell> local;
    for (ThreeLadder& ladder : build_3_ladders(t)) {
      Cell cell;
      cell.dimension = cone_descriptor(ladder.type).dimension;
      cell.tree_vertices = t.num_vertices();
      cell.type = std::move(ladder.type);
      local.push_back(std::move(cell));
    }
    return local;
  };

  std::vector<std::vector<Cell>> per_tree(trees.size());
  if (jobs > 1) {
    std::vector<std::future<std::vector<Cell>>> futs;
    for (const auto& t : trees)
      futs.push_back(std::async(std::launch::async, cells_of_tree, t));
    for (size_t i = 0; i < futs.size(); ++i) per_tree[i] = futs[i].get();
  } else {
    for (size_t i = 0; i < trees.size(); ++i) per_tree[i] = cells_of_tree(trees[i]);
  }

  std::vector<Cell> out;
  std::set<std::string> seen;
  for (auto& chunk : per_tree)
    for (Cell& cell : chunk)
      if (seen.insert(type_certificate(cell.type)).second)
        out.push_back(std::move(cell));
  return out;
}

FacetReport facets_and_adjacency(const std::vector<Cell>& cells) {
  FacetReport report;
  report.facets.resize(cells.size());
  std::map<std::string, std::vector<int>> by_facet;
  for (size_t i = 0; i < cells.size(); ++i) {
    EdgeRelation er = edge_relation(cells[i].type);
    for (int c = 0; c < er.num_classes; ++c) {
      TrigonalType contracted = phi_contract(cells[i].type, {c});
      int dim = cone_descriptor(contracted).dimension;
      // proper facets drop the dimension by one; when the class sits in
      // the kernel of the length map (the stabilization degeneracy at
      // genus 3) the contraction keeps full dimension and still glues
      // neighbouring cells, so it participates in the adjacency
      if (dim < cells[i].dimension - 1) continue;
      std::string cert = type_certificate(contracted);
      if (dim == cells[i].dimension - 1) report.facets[i].push_back(cert);
      by_facet[cert].push_back(static_cast<int>(i));
    }
  }
  std::set<std::pair<int, int>> pairs;
  for (const auto& [cert, owners] : by_facet)
    for (size_t a = 0; a < owners.size(); ++a)
      for (size_t b = a + 1; b < owners.size(); ++b)
        if (owners[a] != owners[b])
          pairs.insert({std::min(owners[a], owners[b]),
                        std::max(owners[a], owners[b])});
  report.adjacent.assign(pairs.begin(), pairs.end());

  // connectivity of the cell-adjacency graph
  if (!cells.empty()) {
    std::vector<char> seen(cells.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    size_t count = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const auto& [a, b] : report.adjacent) {
        int w = -1;
        if (a == v) w = b;
        if (b == v) w = a;
        if (w >= 0 && !seen[w]) seen[w] = 1, ++count, q.push(w);
      }
    }
    report.connected = count == cells.size();
  }
  return report;
}

IndexedMorphism admissible_cover_morphism(const TrigonalType& tt) {
  IndexedMorphism phi = tt.phi;
  phi.src_len = std::vector<Rat>(phi.src.num_edges(), Rat(1));
  phi.tgt_len = std::vector<Rat>(phi.tgt.num_edges(), Rat(1));
  return remove_contractions(phi);
}

bool rh_certified(const IndexedMorphism& phi) {
  for (int v = 0; v < phi.src.num_vertices(); ++v) {
    if (phi.src.valence(v) == 2) continue;  // not a vertex of any canonical model
    if (!riemann_hurwitz_local(phi, v).first) return false;
  }
  return true;
}

bool certify_admissible(const TrigonalType& tt) {
  return rh_certified(admissible_cover_morphism(tt));
}

}  // namespace tropigon
