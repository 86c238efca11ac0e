#pragma once

#include "tropigon/divisor.hpp"
#include "tropigon/moduli.hpp"
#include "tropigon/morphism.hpp"

#include <optional>
#include <string>

namespace tropigon {

// JSON documents. Every document carries {"kind": ..., "version": 1}.
// Rationals are serialized as "p/q" strings and parsed exactly; offsets in
// point specs use the same format. Point specs are "v:ID" or "e:ID@p/q".

std::string emit_graph(const WeightedGraph& g);
std::string emit_metric_graph(const MetricGraph& m);
// `with_graph`: embed the model so the file is self-contained.
std::string emit_divisor(const MetricGraph& m, const Divisor& d, bool with_graph = true);
std::string emit_rational_fn(const MetricGraph& m, const RationalFn& f,
                             bool with_graph = true);
std::string emit_morphism(const IndexedMorphism& phi);
std::string emit_trigonal_type(const TrigonalType& tt);

WeightedGraph parse_graph(const std::string& text);
MetricGraph parse_metric_graph(const std::string& text);
// Divisor/function documents may omit the embedded model, in which case
// `fallback` provides it.
std::pair<MetricGraph, Divisor> parse_divisor(const std::string& text,
                                              const MetricGraph* fallback = nullptr);
std::pair<MetricGraph, RationalFn> parse_rational_fn(const std::string& text,
                                                     const MetricGraph* fallback = nullptr);
IndexedMorphism parse_morphism(const std::string& text);
TrigonalType parse_trigonal_type(const std::string& text);

std::string document_kind(const std::string& text);

Point parse_point_spec(const MetricGraph& m, const std::string& spec);
std::string point_spec(const MetricGraph& m, const Point& p);

// Deterministic DOT rendering (ids sorted). Morphism sources colour the
// fiber classes; indices != 1 appear as edge labels; divisors label their
// chips.
struct DotOptions {
  bool show_lengths = true;
};
std::string to_dot_graph(const MetricGraph& m, const DotOptions& opt = {});
std::string to_dot_graph(const WeightedGraph& g, const DotOptions& opt = {});
std::string to_dot_divisor(const MetricGraph& m, const Divisor& d,
                           const DotOptions& opt = {});
std::string to_dot_morphism(const IndexedMorphism& phi, const DotOptions& opt = {});

}  // namespace tropigon
