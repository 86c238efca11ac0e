#pragma once

#include "tropigon/metric.hpp"

#include <map>
#include <optional>
#include <vector>

namespace tropigon {

// Finite formal integer combination of points of a fixed metric graph.
// Points are normalized on construction, so two divisors are equal iff
// their coefficient maps are equal.
struct Divisor {
  std::map<Point, int> coeff;

  int degree() const;
  bool effective() const;
  int at(const Point& p) const;
  void add(const Point& p, int c);
  std::vector<Point> support() const;

  friend bool operator==(const Divisor& a, const Divisor& b) {
    return a.coeff == b.coeff;
  }
};

Divisor divisor_sum(const Divisor& a, const Divisor& b);
Divisor divisor_diff(const Divisor& a, const Divisor& b);

std::string divisor_to_string(const MetricGraph& m, const Divisor& d);

// Continuous piecewise-linear function with integer slopes, represented by
// its values at the vertices of a refinement of the ambient model. The
// slope on every fine edge must be an integer; divisor_of checks this.
struct RationalFn {
  Refinement domain;          // refinement of the ambient graph
  std::vector<Rat> value;     // per fine vertex

  // A tent supported inside one edge: 0 outside [x1, x2], rising with
  // slope `s` to a peak at the midpoint of [x1, x2]. div = s*x1 + s*x2
  // - 2s*peak. Requires 0 <= x1 < x2 <= length(e).
  static RationalFn tent_on_edge(const MetricGraph& m, int e, const Rat& x1,
                                 const Rat& x2, int s);
};

// div(f): the sum of outgoing slopes at every breakpoint, expressed in the
// ambient model's coordinates. Errors if some slope is not an integer.
Divisor divisor_of(const MetricGraph& m, const RationalFn& f);

// Dhar's burning algorithm. Fire starts at `start` and spreads; a point x
// carrying chips blocks an arriving direction while the number of burnt
// incident directions is at most D(x). Everything else burns on contact.
struct BurnReport {
  bool all_burnt = false;
  // Unburnt region, in ambient coordinates: unburnt support/start points
  // and the closed edges joining them.
  std::vector<Point> unburnt_points;
  // Blocking points with (burning directions, D(x)).
  std::vector<std::pair<Point, std::pair<int, int>>> blocking;
  // The working refinement (support and start as vertices) and the burnt
  // flag per fine vertex; fine edges burn iff an endpoint does.
  Refinement work;
  std::vector<char> vertex_burnt;
};

BurnReport dhar_burn(const MetricGraph& m, const Divisor& d, const Point& start);

// q-reduced divisor of the class of `d`. Accepts divisors that are
// effective away from `base` (chips may be negative at the base only);
// other divisors go through make_effective first via linear equivalence.
// The step guard defaults to 10^6 and can be overridden with the
// TROPIGON_STEP_GUARD environment variable.
Divisor reduce(const MetricGraph& m, Divisor d, const Point& base);

// An effective divisor linearly equivalent to d, or nullopt when the class
// contains none. Degree-preserving.
std::optional<Divisor> make_effective(const MetricGraph& m, const Divisor& d);

bool linearly_equivalent(const MetricGraph& m, const Divisor& a, const Divisor& b);

// Baker-Norine rank via reduced divisors over a rank-determining set: the
// vertices of the loopless refinement of the model, refined at supp(d).
bool rank_at_least(const MetricGraph& m, const Divisor& d, int r);
int rank(const MetricGraph& m, const Divisor& d);

// Equivalent divisor with no two distinct support points in the interior
// of the same edge of the canonical model (the tent move of the
// common-edge remark). Requires d effective with support on the canonical
// core of m.
Divisor smooth_common_edge(const MetricGraph& m, Divisor d);

// deg(d) == k and rk(d) >= 1.
bool is_divisorially_d_gonal_witness(const MetricGraph& m, const Divisor& d, int k);

// Heuristic search for a degree-3 rank->=1 divisor: effective divisors on
// the vertices of the canonical loopless model, then with edge midpoints
// added to the candidate pool. A returned divisor is always verified;
// nullopt is not a proof of non-trigonality.
std::optional<Divisor> find_trigonal_divisor(const MetricGraph& m);

}  // namespace tropigon
