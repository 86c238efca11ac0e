#include "tropigon/io.hpp"

#include "tropigon/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <sstream>

namespace tropigon {

using nlohmann::json;

namespace {

json graph_json(const WeightedGraph& g) {
  json jv = json::array();
  for (const auto& v : g.vertices) jv.push_back({{"id", v.id}, {"weight", v.weight}});
  json je = json::array();
  for (const auto& e : g.edges)
    je.push_back({{"id", e.id},
                  {"ends", json::array({g.vertices[e.u].id, g.vertices[e.v].id})}});
  return json{{"vertices", jv}, {"edges", je}};
}

json metric_json(const MetricGraph& m) {
  json j = graph_json(m.g);
  for (size_t e = 0; e < m.length.size(); ++e)
    j["edges"][e]["length"] = rat_to_string(m.length[e]);
  return j;
}

json parse_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail_parse("malformed JSON document");
  return j;
}

Rat require_rat(const json& j, const std::string& field) {
  if (!j.is_string()) fail_parse(field + ": rationals must be \"p/q\" strings");
  auto r = rat_from_string(j.get<std::string>());
  if (!r) fail_parse(field + ": cannot parse rational '" + j.get<std::string>() + "'");
  return *r;
}

WeightedGraph graph_from_json(const json& j) {
  WeightedGraph g;
  if (!j.contains("vertices") || !j.contains("edges"))
    fail_parse("graph document needs 'vertices' and 'edges'");
  for (const auto& v : j["vertices"]) {
    if (!v.contains("id")) fail_parse("vertex without id");
    g.add_vertex(v["id"].get<std::string>(), v.value("weight", 0));
  }
  for (const auto& e : j["edges"]) {
    if (!e.contains("id") || !e.contains("ends") || e["ends"].size() != 2)
      fail_parse("edge needs an id and two ends");
    int u = g.vertex_index(e["ends"][0].get<std::string>());
    int v = g.vertex_index(e["ends"][1].get<std::string>());
    if (u < 0 || v < 0)
      fail_parse("edge " + e["id"].get<std::string>() + " has unknown endpoints");
    g.add_edge(e["id"].get<std::string>(), u, v);
  }
  g.validate();
  return g;
}

MetricGraph metric_from_json(const json& j) {
  MetricGraph m;
  m.g = graph_from_json(j);
  for (const auto& e : j["edges"]) {
    if (!e.contains("length"))
      fail_parse("metric graph edge " + e["id"].get<std::string>() + " lacks a length");
    m.length.push_back(require_rat(e["length"], "edge length"));
  }
  m.validate();
  return m;
}

void require_kind(const json& j, const std::string& kind) {
  if (!j.contains("kind") || j["kind"] != kind)
    fail_parse("expected a document of kind '" + kind + "'");
}

json morphism_json(const IndexedMorphism& phi) {
  json j;
  j["kind"] = "morphism";
  j["version"] = 1;
  if (phi.metric()) {
    j["source"] = metric_json(phi.source_metric());
    j["target"] = metric_json(phi.target_metric());
  } else {
    j["source"] = graph_json(phi.src);
    j["target"] = graph_json(phi.tgt);
  }
  json jv = json::array();
  for (int v = 0; v < phi.src.num_vertices(); ++v)
    jv.push_back(json::array(
        {phi.src.vertices[v].id, phi.tgt.vertices[phi.vertex_map[v]].id}));
  j["vertex_map"] = jv;
  json je = json::array();
  for (int e = 0; e < phi.src.num_edges(); ++e) {
    json item;
    item["edge"] = phi.src.edges[e].id;
    const auto& im = phi.edge_map[e];
    if (im.contracted()) {
      item["to_vertex"] = phi.tgt.vertices[im.vertex].id;
    } else {
      item["to_edge"] = phi.tgt.edges[im.edge].id;
      item["flip"] = im.flip;
      item["index"] = phi.mu[e];
    }
    je.push_back(item);
  }
  j["edge_map"] = je;
  return j;
}

IndexedMorphism morphism_from_json(const json& j) {
  IndexedMorphism phi;
  bool metric = j["source"]["edges"].size() == 0 ||
                j["source"]["edges"][0].contains("length");
  if (metric) {
    MetricGraph s = metric_from_json(j["source"]);
    MetricGraph t = metric_from_json(j["target"]);
    phi.src = s.g;
    phi.tgt = t.g;
    phi.src_len = s.length;
    phi.tgt_len = t.length;
  } else {
    phi.src = graph_from_json(j["source"]);
    phi.tgt = graph_from_json(j["target"]);
  }
  phi.vertex_map.assign(phi.src.num_vertices(), -1);
  for (const auto& pair : j["vertex_map"]) {
    int v = phi.src.vertex_index(pair[0].get<std::string>());
    int w = phi.tgt.vertex_index(pair[1].get<std::string>());
    if (v < 0 || w < 0) fail_parse("vertex map references unknown vertices");
    phi.vertex_map[v] = w;
  }
  for (int v = 0; v < phi.src.num_vertices(); ++v)
    if (phi.vertex_map[v] < 0)
      fail_parse("vertex map misses " + phi.src.vertices[v].id);
  phi.edge_map.assign(phi.src.num_edges(), {});
  phi.mu.assign(phi.src.num_edges(), 0);
  std::vector<char> seen(phi.src.num_edges(), 0);
  for (const auto& item : j["edge_map"]) {
    int e = phi.src.edge_index(item["edge"].get<std::string>());
    if (e < 0) fail_parse("edge map references unknown edge");
    seen[e] = 1;
    if (item.contains("to_vertex")) {
      int w = phi.tgt.vertex_index(item["to_vertex"].get<std::string>());
      if (w < 0) fail_parse("edge map references unknown target vertex");
      phi.edge_map[e] = {-1, w, false};
      phi.mu[e] = 0;
    } else {
      int te = phi.tgt.edge_index(item["to_edge"].get<std::string>());
      if (te < 0) fail_parse("edge map references unknown target edge");
      phi.edge_map[e] = {te, -1, item.value("flip", false)};
      phi.mu[e] = item.value("index", 1);
    }
  }
  for (int e = 0; e < phi.src.num_edges(); ++e)
    if (!seen[e]) fail_parse("edge map misses " + phi.src.edges[e].id);
  return phi;
}

}  // namespace

std::string point_spec(const MetricGraph& m, const Point& p) {
  if (p.is_vertex()) return "v:" + m.g.vertices[p.vertex].id;
  return "e:" + m.g.edges[p.edge].id + "@" + rat_to_string(p.offset);
}

Point parse_point_spec(const MetricGraph& m, const std::string& spec) {
  if (spec.rfind("v:", 0) == 0) {
    int v = m.g.vertex_index(spec.substr(2));
    if (v < 0) fail_parse("unknown vertex in point spec '" + spec + "'");
    return Point::at_vertex(v);
  }
  if (spec.rfind("e:", 0) == 0) {
    size_t at = spec.find('@');
    if (at == std::string::npos) fail_parse("edge point spec needs '@offset'");
    int e = m.g.edge_index(spec.substr(2, at - 2));
    if (e < 0) fail_parse("unknown edge in point spec '" + spec + "'");
    auto off = rat_from_string(spec.substr(at + 1));
    if (!off) fail_parse("bad offset in point spec '" + spec + "'");
    if (*off < 0 || *off > m.len(e))
      fail_parse("offset outside the edge in point spec '" + spec + "'");
    return Point::on_edge(m, e, *off);
  }
  fail_parse("point spec must start with 'v:' or 'e:'");
}

std::string emit_graph(const WeightedGraph& g) {
  json j = graph_json(g);
  j["kind"] = "graph";
  j["version"] = 1;
  return j.dump(2) + "\n";
}

std::string emit_metric_graph(const MetricGraph& m) {
  json j = metric_json(m);
  j["kind"] = "metric_graph";
  j["version"] = 1;
  return j.dump(2) + "\n";
}

std::string emit_divisor(const MetricGraph& m, const Divisor& d, bool with_graph) {
  json j;
  j["kind"] = "divisor";
  j["version"] = 1;
  if (with_graph) j["graph"] = metric_json(m);
  json chips = json::array();
  for (const auto& [p, c] : d.coeff)
    chips.push_back({{"at", point_spec(m, p)}, {"coeff", c}});
  j["chips"] = chips;
  return j.dump(2) + "\n";
}

std::string emit_rational_fn(const MetricGraph& m, const RationalFn& f, bool with_graph) {
  json j;
  j["kind"] = "rational_fn";
  j["version"] = 1;
  if (with_graph) j["graph"] = metric_json(m);
  json vals = json::array();
  for (int v = 0; v < f.domain.fine.g.num_vertices(); ++v) {
    Point p = f.domain.to_coarse(Point::at_vertex(v));
    vals.push_back({{"at", point_spec(m, p)}, {"value", rat_to_string(f.value[v])}});
  }
  j["values"] = vals;
  return j.dump(2) + "\n";
}

std::string emit_morphism(const IndexedMorphism& phi) {
  return morphism_json(phi).dump(2) + "\n";
}

std::string emit_trigonal_type(const TrigonalType& tt) {
  json j;
  j["kind"] = "trigonal_type";
  j["version"] = 1;
  j["morphism"] = morphism_json(tt.phi);
  j["morphism"].erase("kind");
  j["morphism"].erase("version");
  return j.dump(2) + "\n";
}

std::string document_kind(const std::string& text) {
  json j = parse_text(text);
  if (!j.contains("kind")) fail_parse("document lacks a 'kind' field");
  return j["kind"].get<std::string>();
}

WeightedGraph parse_graph(const std::string& text) {
  json j = parse_text(text);
  require_kind(j, "graph");
  return graph_from_json(j);
}

MetricGraph parse_metric_graph(const std::string& text) {
  json j = parse_text(text);
  require_kind(j, "metric_graph");
  return metric_from_json(j);
}

std::pair<MetricGraph, Divisor> parse_divisor(const std::string& text,
                                              const MetricGraph* fallback) {
  json j = parse_text(text);
  require_kind(j, "divisor");
  MetricGraph m;
  if (j.contains("graph")) m = metric_from_json(j["graph"]);
  else if (fallback) m = *fallback;
  else fail_parse("divisor document has no embedded graph and none was supplied");
  Divisor d;
  for (const auto& chip : j["chips"]) {
    Point p = parse_point_spec(m, chip["at"].get<std::string>());
    d.add(p, chip["coeff"].get<int>());
  }
  return {std::move(m), std::move(d)};
}

std::pair<MetricGraph, RationalFn> parse_rational_fn(const std::string& text,
                                                     const MetricGraph* fallback) {
  json j = parse_text(text);
  require_kind(j, "rational_fn");
  MetricGraph m;
  if (j.contains("graph")) m = metric_from_json(j["graph"]);
  else if (fallback) m = *fallback;
  else fail_parse("rational_fn document has no embedded graph and none was supplied");
  std::vector<Point> pts;
  std::vector<std::pair<Point, Rat>> values;
  for (const auto& item : j["values"]) {
    Point p = parse_point_spec(m, item["at"].get<std::string>());
    values.push_back({p, require_rat(item["value"], "function value")});
    if (!p.is_vertex()) pts.push_back(p);
  }
  RationalFn f;
  f.domain = refine_at(m, pts);
  f.value.assign(f.domain.fine.g.num_vertices(), Rat(0));
  std::vector<char> assigned(f.value.size(), 0);
  for (const auto& [p, val] : values) {
    Point fp = f.domain.to_fine(p);
    if (!fp.is_vertex()) fail_internal("function breakpoint missing from refinement");
    f.value[fp.vertex] = val;
    assigned[fp.vertex] = 1;
  }
  for (size_t v = 0; v < assigned.size(); ++v)
    if (!assigned[v])
      fail_parse("rational_fn misses a value at " +
                 point_spec(m, f.domain.to_coarse(Point::at_vertex(static_cast<int>(v)))));
  return {std::move(m), std::move(f)};
}

IndexedMorphism parse_morphism(const std::string& text) {
  json j = parse_text(text);
  require_kind(j, "morphism");
  return morphism_from_json(j);
}

TrigonalType parse_trigonal_type(const std::string& text) {
  json j = parse_text(text);
  require_kind(j, "trigonal_type");
  return make_trigonal_type(morphism_from_json(j["morphism"]));
}

// ---------------------------------------------------------------------------
// DOT

namespace {

const char* kPalette[] = {"red",    "blue",   "forestgreen", "orange",
                          "purple", "brown",  "deeppink",    "teal",
                          "olive",  "navy",   "maroon",      "darkcyan"};
constexpr int kPaletteSize = 12;

std::vector<int> sorted_by_id(const WeightedGraph& g, bool edges) {
  std::vector<int> idx(edges ? g.num_edges() : g.num_vertices());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return edges ? g.edges[a].id < g.edges[b].id : g.vertices[a].id < g.vertices[b].id;
  });
  return idx;
}

void dot_nodes(std::ostringstream& os, const WeightedGraph& g) {
  for (int v : sorted_by_id(g, false)) {
    os << "  \"" << g.vertices[v].id << "\"";
    if (g.vertices[v].weight > 0)
      os << " [label=\"" << g.vertices[v].id << " (w=" << g.vertices[v].weight
         << ")\"]";
    os << ";\n";
  }
}

}  // namespace

std::string to_dot_graph(const WeightedGraph& g, const DotOptions&) {
  std::ostringstream os;
  os << "graph {\n";
  dot_nodes(os, g);
  for (int e : sorted_by_id(g, true)) {
    os << "  \"" << g.vertices[g.edges[e].u].id << "\" -- \""
       << g.vertices[g.edges[e].v].id << "\" [label=\"" << g.edges[e].id << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string to_dot_graph(const MetricGraph& m, const DotOptions& opt) {
  std::ostringstream os;
  os << "graph {\n";
  dot_nodes(os, m.g);
  for (int e : sorted_by_id(m.g, true)) {
    os << "  \"" << m.g.vertices[m.g.edges[e].u].id << "\" -- \""
       << m.g.vertices[m.g.edges[e].v].id << "\" [label=\"" << m.g.edges[e].id;
    if (opt.show_lengths) os << " (" << rat_to_string(m.len(e)) << ")";
    os << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string to_dot_divisor(const MetricGraph& m, const Divisor& d, const DotOptions& opt) {
  std::ostringstream os;
  os << "graph {\n";
  for (int v : sorted_by_id(m.g, false)) {
    os << "  \"" << m.g.vertices[v].id << "\"";
    int c = d.at(Point::at_vertex(v));
    if (c != 0)
      os << " [label=\"" << m.g.vertices[v].id << " [" << (c > 0 ? "+" : "") << c
         << "]\", style=filled, fillcolor=lightcoral]";
    os << ";\n";
  }
  for (int e : sorted_by_id(m.g, true)) {
    std::ostringstream label;
    label << m.g.edges[e].id;
    if (opt.show_lengths) label << " (" << rat_to_string(m.len(e)) << ")";
    for (const auto& [p, c] : d.coeff)
      if (!p.is_vertex() && p.edge == e)
        label << " [" << (c > 0 ? "+" : "") << c << "@" << rat_to_string(p.offset)
              << "]";
    os << "  \"" << m.g.vertices[m.g.edges[e].u].id << "\" -- \""
       << m.g.vertices[m.g.edges[e].v].id << "\" [label=\"" << label.str()
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string to_dot_morphism(const IndexedMorphism& phi, const DotOptions& opt) {
  // one colour per fiber class (sorted target-edge order), then one per
  // contracted edge: the equivalence classes of the morphism
  std::map<int, std::string> colour;          // target edge -> colour
  std::map<int, std::string> vertical_colour;  // contracted source edge -> colour
  {
    int next = 0;
    for (int te : sorted_by_id(phi.tgt, true))
      colour[te] = kPalette[next++ % kPaletteSize];
    for (int e : sorted_by_id(phi.src, true))
      if (phi.edge_map[e].contracted())
        vertical_colour[e] = kPalette[next++ % kPaletteSize];
  }
  std::ostringstream os;
  os << "graph {\n";
  os << "  subgraph cluster_source {\n    label=\"source\";\n";
  for (int v : sorted_by_id(phi.src, false))
    os << "    \"s_" << phi.src.vertices[v].id << "\" [label=\""
       << phi.src.vertices[v].id << "\"];\n";
  for (int e : sorted_by_id(phi.src, true)) {
    const auto& im = phi.edge_map[e];
    std::ostringstream attrs;
    if (im.contracted()) {
      attrs << "style=dashed, color=" << vertical_colour[e];
    } else {
      attrs << "color=" << colour[im.edge];
    }
    std::ostringstream label;
    label << phi.src.edges[e].id;
    if (!im.contracted() && phi.mu[e] != 1) label << " x" << phi.mu[e];
    if (phi.metric() && opt.show_lengths)
      label << " (" << rat_to_string((*phi.src_len)[e]) << ")";
    os << "    \"s_" << phi.src.vertices[phi.src.edges[e].u].id << "\" -- \"s_"
       << phi.src.vertices[phi.src.edges[e].v].id << "\" [label=\"" << label.str()
       << "\", " << attrs.str() << "];\n";
  }
  os << "  }\n  subgraph cluster_target {\n    label=\"target\";\n";
  for (int v : sorted_by_id(phi.tgt, false))
    os << "    \"t_" << phi.tgt.vertices[v].id << "\" [label=\""
       << phi.tgt.vertices[v].id << "\"];\n";
  for (int e : sorted_by_id(phi.tgt, true)) {
    std::ostringstream label;
    label << phi.tgt.edges[e].id;
    if (phi.metric() && opt.show_lengths)
      label << " (" << rat_to_string((*phi.tgt_len)[e]) << ")";
    os << "    \"t_" << phi.tgt.vertices[phi.tgt.edges[e].u].id << "\" -- \"t_"
       << phi.tgt.vertices[phi.tgt.edges[e].v].id << "\" [label=\"" << label.str()
       << "\", color=" << colour[e] << "];\n";
  }
  os << "  }\n}\n";
  return os.str();
}

}  // namespace tropigon
