#include "tropigon/divisor.hpp"

#include "tropigon/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <queue>
#include <sstream>

namespace tropigon {

int Divisor::degree() const {
  int d = 0;
  for (const auto& [p, c] : coeff) d += c;
  return d;
}

bool Divisor::effective() const {
  for (const auto& [p, c] : coeff)
    if (c < 0) return false;
  return true;
}

int Divisor::at(const Point& p) const {
  auto it = coeff.find(p);
  return it == coeff.end() ? 0 : it->second;
}

void Divisor::add(const Point& p, int c) {
  if (c == 0) return;
  auto it = coeff.find(p);
  if (it == coeff.end()) {
    coeff[p] = c;
  } else {
    it->second += c;
    if (it->second == 0) coeff.erase(it);
  }
}

std::vector<Point> Divisor::support() const {
  std::vector<Point> s;
  for (const auto& [p, c] : coeff) s.push_back(p);
  return s;
}

Divisor divisor_sum(const Divisor& a, const Divisor& b) {
  Divisor out = a;
  for (const auto& [p, c] : b.coeff) out.add(p, c);
  return out;
}

Divisor divisor_diff(const Divisor& a, const Divisor& b) {
  Divisor out = a;
  for (const auto& [p, c] : b.coeff) out.add(p, -c);
  return out;
}

std::string divisor_to_string(const MetricGraph& m, const Divisor& d) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [p, c] : d.coeff) {
    if (!first) os << " + ";
    first = false;
    os << c << "*" << point_to_string(m, p);
  }
  if (first) os << "0";
  return os.str();
}

// ---------------------------------------------------------------------------
// Rational functions

RationalFn RationalFn::tent_on_edge(const MetricGraph& m, int e, const Rat& x1,
                                    const Rat& x2, int s) {
  if (!(0 <= x1 && x1 < x2 && x2 <= m.len(e))) fail_pre("bad tent interval");
  Rat mid = (x1 + x2) / 2;
  std::vector<Point> pts;
  for (const Rat& o : {x1, mid, x2}) {
    if (o > 0 && o < m.len(e)) {
      Point p;
      p.edge = e;
      p.offset = o;
      pts.push_back(p);
    }
  }
  RationalFn f;
  f.domain = refine_at(m, pts);
  f.value.assign(f.domain.fine.g.num_vertices(), Rat(0));
  Point peak;
  peak.edge = e;
  peak.offset = mid;
  Point fp = f.domain.to_fine(peak);
  if (!fp.is_vertex()) fail_internal("tent peak is not a refinement vertex");
  f.value[fp.vertex] = Rat(s) * (x2 - x1) / 2;
  return f;
}

Divisor divisor_of(const MetricGraph& m, const RationalFn& f) {
  const Refinement& ref = f.domain;
  if (static_cast<int>(f.value.size()) != ref.fine.g.num_vertices())
    fail_pre("rational function value vector does not match its domain");
  Divisor out;
  for (int v = 0; v < ref.fine.g.num_vertices(); ++v) {
    int total = 0;
    for (int e = 0; e < ref.fine.g.num_edges(); ++e) {
      const auto& ed = ref.fine.g.edges[e];
      for (int end = 0; end < 2; ++end) {
        int at = end == 0 ? ed.u : ed.v;
        int other = end == 0 ? ed.v : ed.u;
        if (at != v) continue;
        Rat slope = (f.value[other] - f.value[v]) / ref.fine.len(e);
        if (denominator(slope) != 1)
          fail_structure("non-integer slope on edge " + ref.fine.g.edges[e].id);
        total += static_cast<int>(numerator(slope));
      }
    }
    if (total != 0) out.add(ref.to_coarse(Point::at_vertex(v)), total);
  }
  (void)m;
  return out;
}

// ---------------------------------------------------------------------------
// Dhar's burning algorithm

namespace {

struct Work {
  Refinement ref;
  std::vector<int> chips;  // per fine vertex
  int base_vertex = -1;    // fine vertex of the distinguished point, if any
};

Work make_work(const MetricGraph& m, const Divisor& d,
               const std::vector<Point>& extra) {
  std::vector<Point> pts = d.support();
  pts.insert(pts.end(), extra.begin(), extra.end());
  Work w;
  w.ref = refine_at(m, pts);
  w.chips.assign(w.ref.fine.g.num_vertices(), 0);
  for (const auto& [p, c] : d.coeff) {
    Point fp = w.ref.to_fine(p);
    if (!fp.is_vertex()) fail_internal("support point missing from refinement");
    w.chips[fp.vertex] += c;
  }
  if (!extra.empty()) {
    Point fb = w.ref.to_fine(extra.front());
    if (!fb.is_vertex()) fail_internal("base point missing from refinement");
    w.base_vertex = fb.vertex;
  }
  return w;
}

Divisor to_divisor(const Work& w) {
  Divisor d;
  for (int v = 0; v < w.ref.fine.g.num_vertices(); ++v)
    if (w.chips[v] != 0) d.add(w.ref.to_coarse(Point::at_vertex(v)), w.chips[v]);
  return d;
}

// Burn from `start`. A vertex burns when strictly more incident directions
// are burning than it has chips; the start vertex burns unconditionally.
std::vector<char> burn_vertices(const Work& w, int start) {
  const WeightedGraph& g = w.ref.fine.g;
  std::vector<char> burnt(g.num_vertices(), 0);
  burnt[start] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < g.num_vertices(); ++v) {
      if (burnt[v]) continue;
      int dirs = 0;
      for (int e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edges[e];
        if (ed.u == v && burnt[ed.v]) ++dirs;
        if (ed.v == v && burnt[ed.u]) ++dirs;
      }
      if (dirs > w.chips[v]) {
        burnt[v] = 1;
        changed = true;
      }
    }
  }
  return burnt;
}

long long step_guard() {
  if (const char* env = std::getenv("TROPIGON_STEP_GUARD")) {
    long long v = std::atoll(env);
    if (v > 0) return v;
  }
  return 1000000;
}

// Core reduction; requires d effective away from base.
Divisor core_reduce(const MetricGraph& m, Divisor d, const Point& base) {
  for (const auto& [p, c] : d.coeff)
    if (c < 0 && !(p == base))
      fail_pre("core reduction needs a divisor effective away from the base");
  long long guard = step_guard();
  for (long long step = 0; step < guard; ++step) {
    Work w = make_work(m, d, {base});
    std::vector<char> burnt = burn_vertices(w, w.base_vertex);
    const WeightedGraph& g = w.ref.fine.g;
    bool all = std::all_of(burnt.begin(), burnt.end(), [](char c) { return c; });
    if (all) return d;

    // Fire the unburnt set: each boundary chip moves distance eps along
    // every incident direction that leaves the set. Every such direction
    // ends at a burnt vertex, so eps = min length is always reachable.
    std::vector<std::pair<int, int>> fired;  // (vertex, 2*edge+end)
    std::optional<Rat> eps;
    for (int v = 0; v < g.num_vertices(); ++v) {
      if (burnt[v]) continue;
      for (int e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edges[e];
        for (int end = 0; end < 2; ++end) {
          int at = end == 0 ? ed.u : ed.v;
          int other = end == 0 ? ed.v : ed.u;
          if (at != v || !burnt[other]) continue;
          fired.push_back({v, e * 2 + end});
          if (!eps || w.ref.fine.len(e) < *eps) eps = w.ref.fine.len(e);
        }
      }
    }
    if (fired.empty()) fail_internal("unburnt region with no exit directions");
    for (const auto& [v, ee] : fired) {
      (void)ee;
      if (w.chips[v] <= 0)
        fail_internal("Dhar invariant violated: firing an empty point");
      --w.chips[v];
    }
    Divisor next = to_divisor(w);
    for (const auto& [v, ee] : fired) {
      (void)v;
      int e = ee / 2, end = ee % 2;
      Rat off = (end == 0) ? *eps : w.ref.fine.len(e) - *eps;
      Point fine_pt = Point::on_edge(w.ref.fine, e, off);
      next.add(w.ref.to_coarse(fine_pt), 1);
    }
    d = std::move(next);
  }
  fail_internal("reduction step guard exceeded (TROPIGON_STEP_GUARD)");
}

// Clears negative chips away from `base` by repeatedly replacing the
// positive part with its reduced form at a debt point. The maximum-at-p
// property of p-reduced divisors makes this succeed whenever an
// equivalent divisor effective away from base exists; each round clears
// one debt point for good.
std::optional<Divisor> clear_negatives(const MetricGraph& m, Divisor d,
                                       const Point& base) {
  for (int rounds = 0; rounds <= static_cast<int>(d.coeff.size()) + 1; ++rounds) {
    Point debt_point;
    int debt = 0;
    for (const auto& [p, c] : d.coeff) {
      if (c < 0 && !(p == base)) {
        debt_point = p;
        debt = -c;
        break;
      }
    }
    if (debt == 0) return d;
    Divisor positive;
    for (const auto& [p, c] : d.coeff)
      if (c > 0) positive.add(p, c);
    Divisor reduced_pos = core_reduce(m, positive, debt_point);
    if (reduced_pos.at(debt_point) < debt) return std::nullopt;
    Divisor next = reduced_pos;
    for (const auto& [p, c] : d.coeff)
      if (c < 0) next.add(p, c);
    d = std::move(next);
  }
  fail_internal("negative clearing failed to terminate");
}

}  // namespace

Divisor reduce(const MetricGraph& m, Divisor d, const Point& base) {
  int shift = 0;
  for (const auto& [p, c] : d.coeff)
    if (c < 0 && !(p == base)) shift -= c;
  if (shift == 0) return core_reduce(m, std::move(d), base);
  // Lift by enough chips at the base that every clearing step has an
  // effective representative to draw on, reduce, then shift back. Chips at
  // the base are invisible to burning, so q-reducedness is unaffected.
  int g = genus(m);
  int lift = shift + std::max(g, 0) + std::abs(d.degree()) + 5;
  d.add(base, lift);
  auto cleared = clear_negatives(m, std::move(d), base);
  if (!cleared)
    fail_internal("negative clearing failed despite base lift");
  Divisor out = core_reduce(m, std::move(*cleared), base);
  out.add(base, -lift);
  return out;
}

std::optional<Divisor> make_effective(const MetricGraph& m, const Divisor& d) {
  if (d.degree() < 0) return std::nullopt;
  Point q = Point::at_vertex(0);
  Divisor r = reduce(m, d, q);
  if (r.effective()) return r;
  return std::nullopt;
}

bool linearly_equivalent(const MetricGraph& m, const Divisor& a, const Divisor& b) {
  if (a == b) return true;
  if (a.degree() != b.degree()) return false;
  Point q = Point::at_vertex(0);
  return reduce(m, a, q) == reduce(m, b, q);
}

// ---------------------------------------------------------------------------
// Rank

namespace {

// Rank-determining set: the vertices of the canonical loopless model
// (lifted back to ambient coordinates), refined at the divisor support.
// Below genus 2 the canonical model does not exist; the vertices of the
// loopless refinement of the model itself serve instead (the vertex set of
// any loopless model is rank-determining).
std::vector<Point> rank_determining_points(const MetricGraph& m, const Divisor& d) {
  std::vector<Point> pts;
  if (genus(m) >= 2) {
    Retraction can = canonical_loopless_model(m);
    for (int v = 0; v < can.core.g.num_vertices(); ++v)
      pts.push_back(lift_point(m, can, Point::at_vertex(v)));
  } else {
    for (int v = 0; v < m.g.num_vertices(); ++v) pts.push_back(Point::at_vertex(v));
    for (int e = 0; e < m.g.num_edges(); ++e) {
      if (m.g.is_loop(e)) {
        Point p;
        p.edge = e;
        p.offset = m.len(e) / 2;
        pts.push_back(p);
      }
    }
  }
  for (const auto& [p, c] : d.coeff) pts.push_back(p);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

bool rank_at_least_effective(const MetricGraph& m, const Divisor& d, int r) {
  if (r <= 0) return true;
  if (d.degree() < r) return false;
  for (const Point& v : rank_determining_points(m, d)) {
    Divisor dv = core_reduce(m, d, v);
    if (dv.at(v) < 1) return false;
    if (r > 1) {
      dv.add(v, -1);
      if (!rank_at_least_effective(m, dv, r - 1)) return false;
    }
  }
  return true;
}

}  // namespace

bool rank_at_least(const MetricGraph& m, const Divisor& d, int r) {
  if (r < 0) return true;
  Divisor eff = d;
  if (!eff.effective()) {
    auto e = make_effective(m, d);
    if (!e) return false;
    eff = std::move(*e);
  }
  return rank_at_least_effective(m, eff, r);
}

int rank(const MetricGraph& m, const Divisor& d) {
  if (d.degree() < 0) return -1;
  std::optional<Divisor> eff =
      d.effective() ? std::optional<Divisor>(d) : make_effective(m, d);
  if (!eff) return -1;
  int g = genus(m);
  int deg = d.degree();
  int cap = deg;
  if (deg >= 2 * g - 1) cap = deg - g;        // Riemann
  else if (deg < 2 * g - 2) cap = deg / 2;    // Clifford
  int r = 0;
  while (r < cap && rank_at_least_effective(m, *eff, r + 1)) ++r;
  return r;
}

// ---------------------------------------------------------------------------

Divisor smooth_common_edge(const MetricGraph& m, Divisor d) {
  if (!d.effective()) fail_pre("smoothing requires an effective divisor");
  Retraction can = canonical_model(m);
  // express the divisor in canonical coordinates
  Divisor cd;
  for (const auto& [p, c] : d.coeff) {
    if (!is_retained(m, can, p))
      fail_pre("divisor support lies on a tree absent from the canonical model");
    cd.add(can.map_point(m, p), c);
  }
  for (;;) {
    int edge = -1;
    std::vector<Point> interior;
    for (int e = 0; e < can.core.g.num_edges() && edge < 0; ++e) {
      interior.clear();
      for (const auto& [p, c] : cd.coeff)
        if (!p.is_vertex() && p.edge == e) interior.push_back(p);
      if (interior.size() >= 2) edge = e;
    }
    if (edge < 0) break;
    // tent move on the two extreme points: both slide outward by the
    // smaller distance to their endpoint, so one of them reaches a vertex
    const Point& xi = interior.front();
    const Point& xj = interior.back();
    Rat t = std::min(xi.offset, can.core.len(edge) - xj.offset);
    cd.add(xi, -1);
    cd.add(xj, -1);
    cd.add(Point::on_edge(can.core, edge, xi.offset - t), 1);
    cd.add(Point::on_edge(can.core, edge, xj.offset + t), 1);
  }
  Divisor out;
  for (const auto& [p, c] : cd.coeff) out.add(lift_point(m, can, p), c);
  return out;
}

bool is_divisorially_d_gonal_witness(const MetricGraph& m, const Divisor& d, int k) {
  if (d.degree() != k) fail_pre("witness degree does not match the requested gonality");
  return rank_at_least(m, d, 1);
}

std::optional<Divisor> find_trigonal_divisor(const MetricGraph& m) {
  if (genus(m) < 2) fail_pre("trigonal search requires genus >= 2");
  Retraction can = canonical_loopless_model(m);
  std::vector<Point> pool;
  for (int v = 0; v < can.core.g.num_vertices(); ++v)
    pool.push_back(lift_point(m, can, Point::at_vertex(v)));

  auto try_pool = [&](const std::vector<Point>& pts) -> std::optional<Divisor> {
    int n = static_cast<int>(pts.size());
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k) {
          Divisor d;
          d.add(pts[i], 1);
          d.add(pts[j], 1);
          d.add(pts[k], 1);
          if (rank_at_least_effective(m, d, 1)) return d;
        }
    return std::nullopt;
  };

  if (auto hit = try_pool(pool)) return hit;
  // widen: midpoints of all canonical loopless edges
  std::vector<Point> wide = pool;
  for (int e = 0; e < can.core.g.num_edges(); ++e) {
    Point mid;
    mid.edge = e;
    mid.offset = can.core.len(e) / 2;
    wide.push_back(lift_point(m, can, mid));
  }
  std::sort(wide.begin(), wide.end());
  wide.erase(std::unique(wide.begin(), wide.end()), wide.end());
  if (auto hit = try_pool(wide)) return hit;
  return std::nullopt;
}

BurnReport dhar_burn(const MetricGraph& m, const Divisor& d, const Point& start) {
  if (!d.effective()) fail_pre("Dhar's algorithm requires an effective divisor");
  Work w = make_work(m, d, {start});
  BurnReport rep;
  rep.vertex_burnt = burn_vertices(w, w.base_vertex);
  rep.all_burnt = std::all_of(rep.vertex_burnt.begin(), rep.vertex_burnt.end(),
                              [](char c) { return c; });
  const WeightedGraph& g = w.ref.fine.g;
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (rep.vertex_burnt[v]) continue;
    rep.unburnt_points.push_back(w.ref.to_coarse(Point::at_vertex(v)));
    int dirs = 0;
    for (int e = 0; e < g.num_edges(); ++e) {
      const auto& ed = g.edges[e];
      if (ed.u == v && rep.vertex_burnt[ed.v]) ++dirs;
      if (ed.v == v && rep.vertex_burnt[ed.u]) ++dirs;
    }
    if (dirs > 0)
      rep.blocking.push_back(
          {w.ref.to_coarse(Point::at_vertex(v)), {dirs, w.chips[v]}});
  }
  rep.work = std::move(w.ref);
  return rep;
}

}  // namespace tropigon
