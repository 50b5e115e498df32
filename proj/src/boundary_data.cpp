#include "lgp/boundary_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lgp/error.hpp"

namespace lgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap(double s, double perimeter) {
  double w = std::fmod(s, perimeter);
  if (w < 0.0) w += perimeter;
  if (w >= perimeter) w = 0.0;
  return w;
}

struct Interval {
  double a;
  double b;
};

// The arc as at most two intervals of [0, P].
std::vector<Interval> arc_intervals(const BoundaryArc& arc, double perimeter) {
  if (arc.length >= perimeter) return {{0.0, perimeter}};
  const double start = wrap(arc.s_start, perimeter);
  const double end = start + arc.length;
  if (end <= perimeter) return {{start, end}};
  return {{start, perimeter}, {0.0, end - perimeter}};
}

double overlap(Interval x, double a, double b) { return std::max(0.0, std::min(x.b, b) - std::max(x.a, a)); }

bool in_arc(double s, const BoundaryArc& arc, double perimeter, Endpoints ends) {
  constexpr double eps = 1e-12;
  if (arc.length >= perimeter) return true;
  const double off = arc.offset_of(s, perimeter);
  if (ends == Endpoints::closed) return off <= arc.length + eps || off >= perimeter - eps;
  return off > eps && off < arc.length - eps;
}

}  // namespace

ComponentFunction::ComponentFunction(double perimeter, std::vector<Breakpoint> breakpoints, std::vector<Jump> jumps,
                                     double shift)
    : perimeter_(perimeter), breakpoints_(std::move(breakpoints)), jumps_(std::move(jumps)), shift_(shift) {
  if (!(perimeter_ > 0.0)) throw Error(ErrorCode::invalid_input, "boundary function needs a positive perimeter");
  if (breakpoints_.size() < 2) throw Error(ErrorCode::invalid_input, "boundary function needs two breakpoints");
  const double tol = 1e-9 * perimeter_;
  if (std::fabs(breakpoints_.front().s) > tol || std::fabs(breakpoints_.back().s - perimeter_) > tol) {
    throw Error(ErrorCode::invalid_input, "breakpoints must start at s = 0 and end at the perimeter");
  }
  breakpoints_.front().s = 0.0;
  breakpoints_.back().s = perimeter_;
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i + 1].s > breakpoints_[i].s)) {
      throw Error(ErrorCode::invalid_input, "breakpoints must be strictly increasing in s");
    }
    if (!std::isfinite(breakpoints_[i].value)) throw Error(ErrorCode::invalid_input, "non-finite boundary value");
  }
  for (auto& j : jumps_) {
    j.s = wrap(j.s, perimeter_);
    if (!std::isfinite(j.height)) throw Error(ErrorCode::invalid_input, "non-finite jump");
  }
  std::sort(jumps_.begin(), jumps_.end(), [](const Jump& a, const Jump& b) { return a.s < b.s; });
  double net = breakpoints_.back().value - breakpoints_.front().value;
  for (const auto& j : jumps_) net += j.height;
  if (std::fabs(net) > 1e-9 * std::max(1.0, total_variation())) {
    std::ostringstream msg;
    msg << "boundary function is not closed: net change " << net;
    throw Error(ErrorCode::invalid_input, msg.str());
  }
}

double ComponentFunction::continuous_part(double s) const {
  if (s <= 0.0) return breakpoints_.front().value;
  if (s >= perimeter_) return breakpoints_.back().value;
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), s,
                                   [](double v, const Breakpoint& b) { return v < b.s; });
  const Breakpoint& b = *it;
  const Breakpoint& a = *(it - 1);
  return a.value + (b.value - a.value) * ((s - a.s) / (b.s - a.s));
}

double ComponentFunction::jumps_up_to(double s, bool inclusive) const {
  double sum = 0.0;
  for (const auto& j : jumps_) {
    if (j.s < s || (inclusive && j.s == s)) sum += j.height;
  }
  return sum;
}

double ComponentFunction::base_value(double s) const {
  const double w = wrap(s, perimeter_);
  return continuous_part(w) + jumps_up_to(w, true);
}

double ComponentFunction::base_left_limit(double s) const {
  const double w = wrap(s, perimeter_);
  if (w == 0.0) return continuous_part(perimeter_) + jumps_up_to(perimeter_, true);
  return continuous_part(w) + jumps_up_to(w, false);
}

double ComponentFunction::total_variation() const {
  double tv = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
    tv += std::fabs(breakpoints_[i + 1].value - breakpoints_[i].value);
  }
  for (const auto& j : jumps_) tv += std::fabs(j.height);
  return tv;
}

double ComponentFunction::min_value() const {
  double m = kInf;
  for (const auto& b : breakpoints_) m = std::min({m, base_value(b.s), base_left_limit(b.s)});
  for (const auto& j : jumps_) m = std::min({m, base_value(j.s), base_left_limit(j.s)});
  return m + shift_;
}

double ComponentFunction::max_value() const {
  double m = -kInf;
  for (const auto& b : breakpoints_) m = std::max({m, base_value(b.s), base_left_limit(b.s)});
  for (const auto& j : jumps_) m = std::max({m, base_value(j.s), base_left_limit(j.s)});
  return m + shift_;
}

BoundaryFunction BoundaryFunction::shifted(double c) const {
  return BoundaryFunction(
      ComponentFunction(outer_.perimeter(), outer_.breakpoints(), outer_.jumps(), outer_.shift() + c),
      ComponentFunction(inner_.perimeter(), inner_.breakpoints(), inner_.jumps(), inner_.shift() + c));
}

bool BoundaryFunction::inner_image_within_outer(double tol) const {
  return inner_.min_value() >= outer_.min_value() - tol && inner_.max_value() <= outer_.max_value() + tol;
}

ComponentFunction sample_linear_clamped(const ConvexBoundary& curve, double ax, double ay, double b, double lo,
                                        double hi) {
  if (lo > hi) throw Error(ErrorCode::invalid_input, "clamp bounds are inverted");
  const auto field = [&](Vec2 p) { return ax * p.x + ay * p.y + b; };
  const auto clamp = [&](double v) { return std::clamp(v, lo, hi); };
  std::vector<Breakpoint> bps;
  const auto cum = curve.cumulative_arclength();
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const Vec2 p0 = curve.vertex(k);
    const Vec2 p1 = curve.vertex(k + 1);
    const double s0 = cum[k];
    const double s1 = k + 1 < curve.size() ? cum[k + 1] : curve.perimeter();
    const double l0 = field(p0);
    const double l1 = field(p1);
    bps.push_back({s0, clamp(l0)});
    std::vector<std::pair<double, double>> cuts;
    for (double level : {lo, hi}) {
      if ((l0 - level) * (l1 - level) < 0.0) cuts.emplace_back((level - l0) / (l1 - l0), level);
    }
    std::sort(cuts.begin(), cuts.end());
    for (auto [t, level] : cuts) {
      const double s = s0 + t * (s1 - s0);
      if (s > bps.back().s && s < s1) bps.push_back({s, level});
    }
  }
  bps.push_back({curve.perimeter(), clamp(field(curve.vertex(0)))});
  return ComponentFunction(curve.perimeter(), std::move(bps));
}

ComponentFunction sample_constant(const ConvexBoundary& curve, double value) {
  return ComponentFunction(curve.perimeter(), {{0.0, value}, {curve.perimeter(), value}});
}

double ComponentMeasure::positive_mass() const {
  double m = 0.0;
  for (const auto& p : pieces) m += std::max(0.0, p.density) * (p.s1 - p.s0);
  for (const auto& a : atoms) m += std::max(0.0, a.mass);
  return m;
}

double ComponentMeasure::negative_mass() const {
  double m = 0.0;
  for (const auto& p : pieces) m += std::max(0.0, -p.density) * (p.s1 - p.s0);
  for (const auto& a : atoms) m += std::max(0.0, -a.mass);
  return m;
}

double ComponentMeasure::mass_on(const BoundaryArc& arc) const {
  double m = 0.0;
  for (const auto& iv : arc_intervals(arc, perimeter)) {
    for (const auto& p : pieces) m += p.density * overlap(iv, p.s0, p.s1);
  }
  for (const auto& a : atoms) {
    if (in_arc(a.s, arc, perimeter, Endpoints::closed)) m += a.mass;
  }
  return m;
}

double ComponentMeasure::sup_density() const {
  double m = 0.0;
  for (const auto& p : pieces) m = std::max(m, std::fabs(p.density));
  return m;
}

double BoundaryMeasure::mass_tolerance() const { return kEpsMassRelative * total_variation(); }

ComponentMeasure tangential_derivative(const ComponentFunction& g, Side side) {
  const double sign = side == Side::outer ? 1.0 : -1.0;
  ComponentMeasure f;
  f.perimeter = g.perimeter();
  const auto& bps = g.breakpoints();
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    const double dv = bps[i + 1].value - bps[i].value;
    if (dv == 0.0) continue;
    f.pieces.push_back({bps[i].s, bps[i + 1].s, sign * dv / (bps[i + 1].s - bps[i].s)});
  }
  for (const auto& j : g.jumps()) {
    if (j.height != 0.0) f.atoms.push_back({j.s, sign * j.height});
  }
  return f;
}

BoundaryMeasure tangential_derivative(const BoundaryFunction& g) {
  BoundaryMeasure f{tangential_derivative(g.outer(), Side::outer), tangential_derivative(g.inner(), Side::inner)};
  for (const ComponentMeasure* c : {&f.outer, &f.inner}) {
    if (std::fabs(c->total_mass()) > 1e-12 * std::max(1.0, c->total_variation())) {
      throw Error(ErrorCode::internal, "tangential derivative is not balanced");
    }
  }
  return f;
}

const char* to_string(ArcKind kind) {
  switch (kind) {
    case ArcKind::increasing:
      return "increasing";
    case ArcKind::decreasing:
      return "decreasing";
    case ArcKind::flat:
      return "flat";
  }
  return "?";
}

std::vector<std::size_t> ArcDecomposition::indices(ArcKind kind) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    if (arcs[i].kind == kind) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> ArcDecomposition::monotone_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    if (arcs[i].kind != ArcKind::flat) out.push_back(i);
  }
  return out;
}

std::size_t ArcDecomposition::empty_flat_count() const {
  return static_cast<std::size_t>(std::count_if(arcs.begin(), arcs.end(), [](const DecomposedArc& a) { return a.empty; }));
}

namespace {

// Run of constant monotonicity sign, unwrapped: [start, start + length].
struct Run {
  double start;
  double length;
  int sign;
  double tv;
};

std::vector<Run> monotone_runs(const ComponentFunction& g) {
  const double P = g.perimeter();
  const auto& bps = g.breakpoints();
  std::vector<double> cuts;
  for (const auto& b : bps) cuts.push_back(b.s);
  for (const auto& j : g.jumps()) cuts.push_back(j.s);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Run> elems;
  std::size_t jump = 0;
  std::size_t seg = 0;
  const auto& jumps = g.jumps();
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double b = cuts[c + 1];
    for (; jump < jumps.size() && jumps[jump].s <= a; ++jump) {
      const double h = jumps[jump].height;
      if (h != 0.0) elems.push_back({jumps[jump].s, 0.0, h > 0.0 ? 1 : -1, std::fabs(h)});
    }
    while (seg + 1 < bps.size() && bps[seg + 1].s <= a) ++seg;
    const double slope = (bps[seg + 1].value - bps[seg].value) / (bps[seg + 1].s - bps[seg].s);
    const int sign = std::fabs(slope) > kEpsSlope ? (slope > 0.0 ? 1 : -1) : 0;
    elems.push_back({a, b - a, sign, std::fabs(slope) * (b - a)});
  }
  for (; jump < jumps.size(); ++jump) {
    const double h = jumps[jump].height;
    if (h != 0.0) elems.push_back({jumps[jump].s, 0.0, h > 0.0 ? 1 : -1, std::fabs(h)});
  }

  std::vector<Run> runs;
  for (const auto& e : elems) {
    if (!runs.empty() && runs.back().sign == e.sign) {
      runs.back().length = e.start + e.length - runs.back().start;
      runs.back().tv += e.tv;
    } else {
      runs.push_back(e);
    }
  }
  if (runs.size() > 1 && runs.front().sign == runs.back().sign) {
    Run& last = runs.back();
    last.length = (P - last.start) + runs.front().start + runs.front().length;
    last.tv += runs.front().tv;
    runs.erase(runs.begin());
  }
  return runs;
}

struct Group {
  double start;
  double length;
  ArcKind kind;
  double tv;
  bool constant;
  std::vector<BoundaryArc> rising;
  std::vector<BoundaryArc> falling;
};

ArcKind kind_of(int sign) { return sign > 0 ? ArcKind::increasing : (sign < 0 ? ArcKind::decreasing : ArcKind::flat); }

std::size_t count_kind(const std::vector<Group>& groups, ArcKind k) {
  return static_cast<std::size_t>(
      std::count_if(groups.begin(), groups.end(), [k](const Group& g) { return g.kind == k; }));
}

// Replace the cyclic range [first, last] by one group. Returns the merged
// group's index.
void merge_range(std::vector<Group>& groups, std::size_t first, std::size_t last, double P, Side side) {
  std::rotate(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(first), groups.end());
  const std::size_t count = (last + groups.size() - first) % groups.size() + 1;
  Group merged{groups[0].start, 0.0, ArcKind::flat, 0.0, true, {}, {}};
  for (std::size_t i = 0; i < count; ++i) {
    Group& g = groups[i];
    merged.tv += g.tv;
    merged.constant = merged.constant && g.kind == ArcKind::flat && g.constant;
    const BoundaryArc arc{side, g.start, g.length};
    if (g.kind == ArcKind::increasing) merged.rising.push_back(arc);
    if (g.kind == ArcKind::decreasing) merged.falling.push_back(arc);
    merged.rising.insert(merged.rising.end(), g.rising.begin(), g.rising.end());
    merged.falling.insert(merged.falling.end(), g.falling.begin(), g.falling.end());
  }
  const Group& tail = groups[count - 1];
  double end = tail.start + tail.length;
  while (end < merged.start) end += P;
  merged.length = std::min(P, end - merged.start);
  if (count == groups.size()) merged.length = P;
  groups.erase(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(count));
  groups.insert(groups.begin(), std::move(merged));
}

void merge_adjacent_flats(std::vector<Group>& groups, double P, Side side) {
  bool changed = true;
  while (changed && groups.size() > 1) {
    changed = false;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const std::size_t j = (i + 1) % groups.size();
      if (groups[i].kind == ArcKind::flat && groups[j].kind == ArcKind::flat) {
        merge_range(groups, i, j, P, side);
        changed = true;
        break;
      }
    }
  }
}

}  // namespace

ArcDecomposition decompose_monotone(const ComponentFunction& g, Side side, std::optional<DecompositionTarget> target) {
  const double P = g.perimeter();
  std::vector<Group> groups;
  for (const auto& r : monotone_runs(g)) {
    groups.push_back({r.start, r.length, kind_of(r.sign), r.tv, r.sign == 0, {}, {}});
  }

  if (target) {
    const double tol = kEpsMassRelative * std::max(1.0, g.total_variation());
    while (count_kind(groups, ArcKind::increasing) > target->increasing ||
           count_kind(groups, ArcKind::decreasing) > target->decreasing) {
      std::vector<std::size_t> mono;
      for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].kind != ArcKind::flat) mono.push_back(i);
      }
      double best = kInf;
      std::size_t best_a = 0;
      std::size_t best_b = 0;
      for (std::size_t m = 0; mono.size() > 1 && m < mono.size(); ++m) {
        const Group& a = groups[mono[m]];
        const Group& b = groups[mono[(m + 1) % mono.size()]];
        if (a.kind == b.kind || std::fabs(a.tv - b.tv) > tol) continue;
        if (a.tv + b.tv < best) {
          best = a.tv + b.tv;
          best_a = mono[m];
          best_b = mono[(m + 1) % mono.size()];
        }
      }
      if (best == kInf || count_kind(groups, ArcKind::increasing) <= target->increasing ||
          count_kind(groups, ArcKind::decreasing) <= target->decreasing) {
        std::ostringstream msg;
        msg << to_string(side) << " boundary: no zero-net-variation grouping reduces the monotone arcs to "
            << target->increasing << " increasing / " << target->decreasing << " decreasing";
        throw Error(ErrorCode::decomposition_ambiguous, msg.str());
      }
      merge_range(groups, best_a, best_b, P, side);
    }
  }
  merge_adjacent_flats(groups, P, side);

  ArcDecomposition dec;
  dec.side = side;
  dec.perimeter = P;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const Group& cur = groups[i];
    DecomposedArc arc;
    arc.arc = {side, wrap(cur.start, P), cur.length};
    arc.kind = cur.kind;
    arc.total_variation = cur.tv;
    arc.constant = cur.kind == ArcKind::flat && cur.constant;
    arc.rising = cur.rising;
    arc.falling = cur.falling;
    dec.arcs.push_back(std::move(arc));
    const Group& next = groups[(i + 1) % groups.size()];
    if (groups.size() > 1 && cur.kind != ArcKind::flat && next.kind != ArcKind::flat) {
      const double at = wrap(cur.start + cur.length, P);
      DecomposedArc gap;
      gap.arc = {side, at, 0.0};
      gap.kind = ArcKind::flat;
      gap.empty = true;
      dec.arcs.push_back(std::move(gap));
      dec.junctions.push_back(at);
    }
  }
  return dec;
}

double total_variation(const ComponentFunction& g, const BoundaryArc& arc, Endpoints ends) {
  const double P = g.perimeter();
  const auto& bps = g.breakpoints();
  double tv = 0.0;
  for (const auto& iv : arc_intervals(arc, P)) {
    for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
      const double len = overlap(iv, bps[i].s, bps[i + 1].s);
      if (len > 0.0) tv += std::fabs(bps[i + 1].value - bps[i].value) * (len / (bps[i + 1].s - bps[i].s));
    }
  }
  for (const auto& j : g.jumps()) {
    if (in_arc(j.s, arc, P, ends)) tv += std::fabs(j.height);
  }
  return tv;
}

namespace {

ComponentFunction integrate_from(const ComponentMeasure& f, Side side, double anchor) {
  const double P = f.perimeter;
  const double sign = side == Side::outer ? 1.0 : -1.0;
  std::vector<double> pts{0.0, P};
  auto pieces = f.pieces;
  std::sort(pieces.begin(), pieces.end(), [](const DensityPiece& a, const DensityPiece& b) { return a.s0 < b.s0; });
  for (const auto& p : pieces) {
    pts.push_back(p.s0);
    pts.push_back(p.s1);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::vector<Breakpoint> bps{{0.0, 0.0}};
  std::size_t k = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]);
    while (k < pieces.size() && pieces[k].s1 <= mid) ++k;
    if (k < pieces.size() && pieces[k].s0 <= mid) acc += pieces[k].density * (pts[i + 1] - pts[i]);
    bps.push_back({pts[i + 1], sign * acc});
  }
  std::vector<Jump> jumps;
  for (const auto& a : f.atoms) jumps.push_back({a.s, sign * a.mass});

  // Closedness is only up to the balance of f; absorb the float residual in
  // the last breakpoint.
  double net = bps.back().value;
  for (const auto& j : jumps) net += j.height;
  bps.back().value -= net;

  const ComponentFunction raw(P, bps, jumps);
  const double offset = raw.base_left_limit(anchor);
  for (auto& b : bps) b.value -= offset;
  return ComponentFunction(P, std::move(bps), std::move(jumps));
}

double anchor_of(const ArcDecomposition& dec, std::size_t chi) {
  const auto inc = dec.indices(ArcKind::increasing);
  if (chi >= inc.size()) {
    throw Error(ErrorCode::missing_anchor, std::string(to_string(dec.side)) + " boundary has no increasing arc #" +
                                               std::to_string(chi));
  }
  const std::size_t at = inc[chi];
  const DecomposedArc& prev = dec.arcs[(at + dec.arcs.size() - 1) % dec.arcs.size()];
  if (prev.kind != ArcKind::flat || prev.empty) {
    throw Error(ErrorCode::missing_anchor,
                std::string(to_string(dec.side)) + " boundary has no flat part before its anchoring increasing arc");
  }
  return dec.arcs[at].arc.s_start;
}

}  // namespace

BoundaryFunction anchor_trace(const BoundaryMeasure& f, const ArcDecomposition& outer, const ArcDecomposition& inner,
                              std::size_t outer_chi, std::size_t inner_chi) {
  if (f.is_zero()) {
    return BoundaryFunction(ComponentFunction(f.outer.perimeter, {{0.0, 0.0}, {f.outer.perimeter, 0.0}}),
                            ComponentFunction(f.inner.perimeter, {{0.0, 0.0}, {f.inner.perimeter, 0.0}}));
  }
  const double tv_out = f.outer.total_variation();
  const double tv_in = f.inner.total_variation();
  if (std::fabs(tv_out - tv_in) > f.mass_tolerance()) {
    std::ostringstream msg;
    msg << "|f|(outer) = " << tv_out << " differs from |f|(inner) = " << tv_in;
    throw Error(ErrorCode::mass_mismatch, msg.str());
  }
  const double a_out = anchor_of(outer, outer_chi);
  const double a_in = anchor_of(inner, inner_chi);
  return BoundaryFunction(integrate_from(f.outer, Side::outer, a_out), integrate_from(f.inner, Side::inner, a_in));
}

}  // namespace lgp
