// Command-line front end: divisor arithmetic, covers and moduli cells on
// metric graphs. Exit codes: 0 success, 1 negative mathematical answer,
// 2 usage or format errors.

#include "tropigon/divisor.hpp"
#include "tropigon/error.hpp"
#include "tropigon/io.hpp"
#include "tropigon/moduli.hpp"
#include "tropigon/morphism.hpp"
#include "tropigon/trigonal.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace tropigon;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_parse("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail_parse("cannot write " + path);
  out << text;
}

MetricGraph load_metric(const std::string& path) {
  return parse_metric_graph(slurp(path));
}

std::pair<MetricGraph, Divisor> load_divisor(const std::string& gpath,
                                             const std::string& dpath) {
  MetricGraph m = load_metric(gpath);
  auto [dm, d] = parse_divisor(slurp(dpath), &m);
  return {std::move(dm), std::move(d)};
}

int cmd_info(const std::string& path) {
  std::string text = slurp(path);
  std::string kind = document_kind(text);
  std::cout << "kind: " << kind << "\n";
  if (kind == "graph" || kind == "metric_graph") {
    MetricGraph m;
    if (kind == "graph") {
      WeightedGraph g = parse_graph(text);
      std::cout << "vertices: " << g.num_vertices() << "\nedges: " << g.num_edges()
                << "\ngenus: " << genus(g) << "\nstable: " << (is_stable(g) ? "yes" : "no")
                << "\nedge_connectivity: " << edge_connectivity(g) << "\n";
      return 0;
    }
    m = parse_metric_graph(text);
    std::cout << "vertices: " << m.g.num_vertices() << "\nedges: " << m.g.num_edges()
              << "\ngenus: " << genus(m)
              << "\nedge_connectivity: " << edge_connectivity(m.g) << "\n";
    if (genus(m) >= 2) {
      Retraction can = canonical_model(m);
      Retraction loopless = canonical_loopless_model(m);
      std::cout << "canonical_model: " << can.core.g.num_vertices() << " vertices, "
                << can.core.g.num_edges() << " edges\n";
      std::cout << "canonical_loopless_model: " << loopless.core.g.num_vertices()
                << " vertices, " << loopless.core.g.num_edges() << " edges\n";
    }
    return 0;
  }
  if (kind == "divisor") {
    auto [m, d] = parse_divisor(text);
    std::cout << "degree: " << d.degree() << "\neffective: "
              << (d.effective() ? "yes" : "no") << "\n"
              << "divisor: " << divisor_to_string(m, d) << "\n";
    return 0;
  }
  if (kind == "morphism") {
    IndexedMorphism phi = parse_morphism(text);
    MorphismReport rep = check_morphism(phi);
    std::cout << "structurally_valid: " << rep.structurally_valid << "\nharmonic: "
              << rep.harmonic << "\nnon_degenerate: " << rep.non_degenerate << "\n";
    if (rep.degree) std::cout << "degree: " << *rep.degree << "\n";
    return 0;
  }
  std::cout << "(no further details for this kind)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tropigon: divisors, harmonic covers and moduli cells on metric graphs"};
  app.require_subcommand(1);

  std::string gpath, dpath, d2path, fpath, out, dot, base_spec, point_spec_arg;
  int genus_arg = 3, jobs = 1, max_genus = 0;

  auto* info = app.add_subcommand("info", "summarize a document");
  info->add_option("file", gpath)->required();

  auto* rank_cmd = app.add_subcommand("rank", "Baker-Norine rank of a divisor");
  rank_cmd->add_option("graph", gpath)->required();
  rank_cmd->add_option("divisor", dpath)->required();

  auto* reduce_cmd = app.add_subcommand("reduce", "base-reduced representative");
  reduce_cmd->add_option("graph", gpath)->required();
  reduce_cmd->add_option("divisor", dpath)->required();
  reduce_cmd->add_option("--base", base_spec, "point spec: v:ID or e:ID@p/q")
      ->required();
  reduce_cmd->add_option("-o,--output", out);

  auto* equiv_cmd = app.add_subcommand("equiv", "linear equivalence of two divisors");
  equiv_cmd->add_option("graph", gpath)->required();
  equiv_cmd->add_option("divisor1", dpath)->required();
  equiv_cmd->add_option("divisor2", d2path)->required();

  auto* chk = app.add_subcommand("check-morphism", "harmonicity / degree report");
  chk->add_option("morphism", fpath)->required();

  auto* pb = app.add_subcommand("pullback", "pull a target divisor back");
  pb->add_option("morphism", fpath)->required();
  pb->add_option("divisor", dpath)->required();
  pb->add_option("-o,--output", out);

  auto* rc = app.add_subcommand("remove-contractions",
                                "tropical modification without contractions");
  rc->add_option("morphism", fpath)->required();
  rc->add_option("-o,--output", out);

  auto* tc = app.add_subcommand("trigonal-cover",
                                "degree-3 cover of a tree from a rank-1 divisor");
  tc->add_option("graph", gpath)->required();
  tc->add_option("divisor", dpath)->required();
  tc->add_option("-o,--output", out);
  tc->add_option("--dot", dot);

  auto* fd = app.add_subcommand("find-divisor", "search a degree-3 rank-1 divisor");
  fd->add_option("graph", gpath)->required();
  fd->add_option("-o,--output", out);

  auto* lad = app.add_subcommand("ladders", "3-ladders over trees with g vertices");
  lad->add_option("--genus", genus_arg)->required();

  auto* mod = app.add_subcommand("moduli", "maximal cells of the trigonal moduli");
  mod->add_option("--genus", genus_arg);
  mod->add_option("--max-genus", max_genus, "run for 3..max-genus");
  mod->add_option("--jobs", jobs);

  auto* td = app.add_subcommand("to-dot", "DOT rendering of a document");
  td->add_option("file", gpath)->required();
  td->add_option("-o,--output", out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (info->parsed()) return cmd_info(gpath);

    if (rank_cmd->parsed()) {
      auto [m, d] = load_divisor(gpath, dpath);
      std::cout << rank(m, d) << "\n";
      return 0;
    }
    if (reduce_cmd->parsed()) {
      auto [m, d] = load_divisor(gpath, dpath);
      Point base = parse_point_spec(m, base_spec);
      Divisor r = reduce(m, d, base);
      std::string doc = emit_divisor(m, r);
      if (!out.empty()) spit(out, doc);
      else std::cout << doc;
      return 0;
    }
    if (equiv_cmd->parsed()) {
      auto [m, d1] = load_divisor(gpath, dpath);
      auto [m2, d2] = parse_divisor(slurp(d2path), &m);
      bool eq = linearly_equivalent(m, d1, d2);
      std::cout << (eq ? "equivalent" : "not equivalent") << "\n";
      return eq ? 0 : 1;
    }
    if (chk->parsed()) {
      IndexedMorphism phi = parse_morphism(slurp(fpath));
      MorphismReport rep = check_morphism(phi);
      if (!rep.structurally_valid) {
        for (const auto& v : rep.violations) std::cerr << "structural: " << v << "\n";
        return 2;
      }
      std::cout << "harmonic: " << (rep.harmonic ? "yes" : "no") << "\n";
      std::cout << "non_degenerate: " << (rep.non_degenerate ? "yes" : "no") << "\n";
      if (rep.degree) std::cout << "degree: " << *rep.degree << "\n";
      std::cout << "metric_consistent: " << (rep.metric_consistent ? "yes" : "no")
                << "\n";
      for (const auto& v : rep.metric_violations) std::cout << "  " << v << "\n";
      return (rep.harmonic && rep.non_degenerate && rep.metric_consistent) ? 0 : 1;
    }
    if (pb->parsed()) {
      IndexedMorphism phi = parse_morphism(slurp(fpath));
      MetricGraph tgt = phi.target_metric();
      auto [m, d] = parse_divisor(slurp(dpath), &tgt);
      Divisor pulled = pullback(phi, d);
      std::string doc = emit_divisor(phi.source_metric(), pulled);
      if (!out.empty()) spit(out, doc);
      else std::cout << doc;
      return 0;
    }
    if (rc->parsed()) {
      IndexedMorphism phi = parse_morphism(slurp(fpath));
      IndexedMorphism psi = remove_contractions(phi);
      std::string doc = emit_morphism(psi);
      if (!out.empty()) spit(out, doc);
      else std::cout << doc;
      return 0;
    }
    if (tc->parsed()) {
      auto [m, d] = load_divisor(gpath, dpath);
      TrigonalCover cover = build_trigonal_cover_with_loops(m, d);
      RoundtripReport rep = verify_equivalence_roundtrip(m, d);
      std::cout << "tree vertices: " << cover.phi.tgt.num_vertices()
                << ", tree edges: " << cover.phi.tgt.num_edges() << "\n";
      for (const auto& line : rep.checks) std::cout << "ok: " << line << "\n";
      for (const auto& line : rep.failures) std::cout << "FAIL: " << line << "\n";
      if (!out.empty()) spit(out, emit_morphism(cover.phi));
      if (!dot.empty()) spit(dot, to_dot_morphism(cover.phi));
      return rep.pass ? 0 : 1;
    }
    if (fd->parsed()) {
      MetricGraph m = load_metric(gpath);
      auto d = find_trigonal_divisor(m);
      if (!d) {
        std::cout << "no witness found (not a proof of non-trigonality)\n";
        return 1;
      }
      std::string doc = emit_divisor(m, *d);
      if (!out.empty()) spit(out, doc);
      else std::cout << doc;
      return 0;
    }
    if (lad->parsed()) {
      auto trees = enumerate_trees(genus_arg, 3);
      int total = 0;
      for (size_t i = 0; i < trees.size(); ++i) {
        auto ladders = build_3_ladders(trees[i]);
        total += static_cast<int>(ladders.size());
        std::cout << "tree " << i << ": " << ladders.size() << " ladders";
        if (!ladders.empty()) {
          const auto& g = ladders[0].type.carrier();
          std::cout << " (|V|=" << g.num_vertices() << ", |E|=" << g.num_edges()
                    << ", genus=" << genus(g) << ")";
        }
        std::cout << "\n";
      }
      std::cout << "total: " << total << "\n";
      return 0;
    }
    if (mod->parsed()) {
      int lo = max_genus > 0 ? 3 : genus_arg;
      int hi = max_genus > 0 ? max_genus : genus_arg;
      for (int g = lo; g <= hi; ++g) {
        auto cells = maximal_cells(g, jobs);
        std::set<int> dims;
        for (const auto& c : cells) dims.insert(c.dimension);
        FacetReport fr = facets_and_adjacency(cells);
        std::cout << "genus " << g << ": " << cells.size() << " maximal cells, dimension"
                  << (dims.size() == 1 ? " " : "s ");
        bool first = true;
        for (int d : dims) {
          std::cout << (first ? "" : ",") << d;
          first = false;
        }
        std::cout << ", codim-1 adjacency "
                  << (fr.connected ? "connected" : "NOT connected") << "\n";
      }
      return 0;
    }
    if (td->parsed()) {
      std::string text = slurp(gpath);
      std::string kind = document_kind(text);
      std::string rendered;
      if (kind == "graph") rendered = to_dot_graph(parse_graph(text));
      else if (kind == "metric_graph") rendered = to_dot_graph(parse_metric_graph(text));
      else if (kind == "divisor") {
        auto [m, d] = parse_divisor(text);
        rendered = to_dot_divisor(m, d);
      } else if (kind == "morphism") {
        rendered = to_dot_morphism(parse_morphism(text));
      } else if (kind == "trigonal_type") {
        rendered = to_dot_morphism(parse_trigonal_type(text).phi);
      } else {
        fail_parse("no DOT rendering for documents of kind '" + kind + "'");
      }
      if (!out.empty()) spit(out, rendered);
      else std::cout << rendered;
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
