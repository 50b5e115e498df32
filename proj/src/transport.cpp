#include "lgp/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "lgp/error.hpp"
#include "lgp/kernels.hpp"
#include "lgp/network_simplex.hpp"

namespace lgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Run {
  std::vector<DensityPiece> pieces;  // unwrapped, contiguous
  int sign;
};

std::vector<Run> density_runs(const ComponentMeasure& c) {
  auto pieces = c.pieces;
  std::sort(pieces.begin(), pieces.end(), [](const DensityPiece& a, const DensityPiece& b) { return a.s0 < b.s0; });
  const double gap = 1e-12 * c.perimeter;
  std::vector<Run> runs;
  for (const auto& p : pieces) {
    if (p.density == 0.0 || !(p.s1 > p.s0)) continue;
    const int sign = p.density > 0.0 ? 1 : -1;
    if (!runs.empty() && runs.back().sign == sign && std::fabs(runs.back().pieces.back().s1 - p.s0) <= gap) {
      runs.back().pieces.push_back(p);
    } else {
      runs.push_back({{p}, sign});
    }
  }
  if (runs.size() > 1 && runs.front().sign == runs.back().sign &&
      std::fabs(runs.back().pieces.back().s1 - c.perimeter) <= gap && std::fabs(runs.front().pieces.front().s0) <= gap) {
    for (auto p : runs.front().pieces) {
      p.s0 += c.perimeter;
      p.s1 += c.perimeter;
      runs.back().pieces.push_back(p);
    }
    runs.erase(runs.begin());
  }
  return runs;
}

}  // namespace

CostNorm CostNorm::p_norm(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorCode::invalid_input, "cost norm exponent must lie in (1, inf)");
  CostNorm c;
  c.p_ = p;
  return c;
}

std::string CostNorm::name() const {
  if (is_euclidean()) return "euclidean";
  std::ostringstream os;
  os << "l" << p_;
  return os.str();
}

double CostNorm::operator()(Vec2 d) const {
  if (is_euclidean()) return norm(d);
  const double ax = std::fabs(d.x), ay = std::fabs(d.y);
  const double m = std::max(ax, ay);
  if (m == 0.0) return 0.0;
  return m * std::pow(std::pow(ax / m, p_) + std::pow(ay / m, p_), 1.0 / p_);
}

double AtomicMeasure::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms) m += a.mass;
  return m;
}

Atomization atomize(const Annulus& annulus, const BoundaryMeasure& f, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::invalid_input, "need at least one atom per arc");
  Atomization out;
  for (Side side : {Side::outer, Side::inner}) {
    const ComponentMeasure& c = f.component(side);
    const ConvexBoundary& curve = annulus.boundary(side);
    for (const Run& run : density_runs(c)) {
      double total = 0.0;
      for (const auto& p : run.pieces) total += std::fabs(p.density) * (p.s1 - p.s0);
      const double each = total / static_cast<double>(n);
      std::size_t piece = 0;
      double before = 0.0;  // mass of pieces[0 .. piece)
      for (std::size_t k = 0; k < n; ++k) {
        const double target = (static_cast<double>(k) + 0.5) / static_cast<double>(n) * total;
        while (piece + 1 < run.pieces.size() &&
               before + std::fabs(run.pieces[piece].density) * (run.pieces[piece].s1 - run.pieces[piece].s0) < target) {
          before += std::fabs(run.pieces[piece].density) * (run.pieces[piece].s1 - run.pieces[piece].s0);
          ++piece;
        }
        const auto& p = run.pieces[piece];
        const double s = std::min(p.s1, p.s0 + (target - before) / std::fabs(p.density));
        const double w = curve.wrap(s);
        MassPoint atom{curve.point_at(w), side, w, each};
        (run.sign > 0 ? out.sources : out.sinks).atoms.push_back(atom);
      }
    }
    for (const auto& a : c.atoms) {
      const double w = curve.wrap(a.s);
      MassPoint atom{curve.point_at(w), side, w, std::fabs(a.mass)};
      (a.mass > 0.0 ? out.sources : out.sinks).atoms.push_back(atom);
    }
  }
  return out;
}

double TransportPlan::dual_objective() const {
  double d = 0.0;
  for (std::size_t i = 0; i < sources.atoms.size(); ++i) d += source_potential[i] * sources.atoms[i].mass;
  for (std::size_t j = 0; j < sinks.atoms.size(); ++j) d -= sink_potential[j] * sinks.atoms[j].mass;
  return d;
}

TransportPlan solve(AtomicMeasure sources, AtomicMeasure sinks, CostNorm norm) {
  TransportPlan plan;
  plan.norm = norm;
  const double ms = sources.total_mass();
  const double mt = sinks.total_mass();
  for (const auto* m : {&sources, &sinks}) {
    for (const auto& a : m->atoms) {
      if (!(a.mass > 0.0)) throw Error(ErrorCode::invalid_input, "atom masses must be positive");
    }
  }
  if (std::fabs(ms - mt) > kEpsMassRelative * (ms + mt)) {
    std::ostringstream msg;
    msg << "source mass " << ms << " differs from sink mass " << mt;
    throw Error(ErrorCode::mass_mismatch, msg.str());
  }
  if (ms != mt) {
    const double scale = ms / mt;
    for (auto& a : sinks.atoms) a.mass *= scale;
    // summation order alone moves the totals by a few ulps; not worth a warning
    if (std::fabs(scale - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "sink masses rescaled by " << scale << " to balance the plan";
      plan.warnings.push_back(msg.str());
    }
  }
  plan.sources = std::move(sources);
  plan.sinks = std::move(sinks);
  if (plan.sources.empty()) {
    plan.eps_dual = 1e-8;
    return plan;
  }

  const std::size_t n = plan.sources.atoms.size();
  const std::size_t m = plan.sinks.atoms.size();
  std::vector<double> supply(n), demand(m), cost(n * m);
  double max_cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    supply[i] = plan.sources.atoms[i].mass;
    for (std::size_t j = 0; j < m; ++j) {
      const double c = norm(plan.sources.atoms[i].point, plan.sinks.atoms[j].point);
      cost[i * m + j] = c;
      max_cost = std::max(max_cost, c);
    }
  }
  for (std::size_t j = 0; j < m; ++j) demand[j] = plan.sinks.atoms[j].mass;
  plan.eps_dual = 1e-8 * (1.0 + max_cost);

  TransportationSolution sol = solve_transportation(supply, demand, cost);
  plan.pivots = sol.pivots;
  plan.source_potential = std::move(sol.source_potential);
  plan.sink_potential = std::move(sol.sink_potential);
  for (const auto& f : sol.flows) {
    plan.pairs.push_back({f.source, f.sink, f.flow});
    plan.cost += f.flow * cost[f.source * m + f.sink];
  }
  return plan;
}

double marginal_residual(const TransportPlan& plan) {
  std::vector<double> out(plan.sources.atoms.size(), 0.0), in(plan.sinks.atoms.size(), 0.0);
  for (const auto& p : plan.pairs) {
    out[p.source] += p.mass;
    in[p.sink] += p.mass;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) worst = std::max(worst, std::fabs(out[i] - plan.sources.atoms[i].mass));
  for (std::size_t j = 0; j < in.size(); ++j) worst = std::max(worst, std::fabs(in[j] - plan.sinks.atoms[j].mass));
  const double total = plan.sources.total_mass();
  return total > 0.0 ? worst / total : worst;
}

double duality_gap(const TransportPlan& plan) {
  if (plan.empty()) return 0.0;
  return std::fabs(plan.cost - plan.dual_objective()) / std::max(plan.cost, std::numeric_limits<double>::min());
}

double check_support_equality(const TransportPlan& plan) {
  double worst = 0.0;
  for (const auto& p : plan.pairs) {
    const double r = plan.source_potential[p.source] - plan.sink_potential[p.sink] - plan.pair_cost(p);
    worst = std::max(worst, std::fabs(r));
  }
  return worst;
}

double lipschitz_violation(const TransportPlan& plan) {
  double worst = -kInf;
  for (std::size_t i = 0; i < plan.sources.atoms.size(); ++i) {
    for (std::size_t j = 0; j < plan.sinks.atoms.size(); ++j) {
      const double c = plan.norm(plan.sources.atoms[i].point, plan.sinks.atoms[j].point);
      worst = std::max(worst, plan.source_potential[i] - plan.sink_potential[j] - c);
    }
  }
  return plan.sources.empty() ? 0.0 : worst;
}

std::size_t check_cyclical_monotonicity(const TransportPlan& plan, std::size_t trials, std::uint64_t seed) {
  const std::size_t k = plan.pairs.size();
  if (k < 2) return 0;
  const auto violates = [&](const PlanPair& a, const PlanPair& b) {
    const double kept = plan.pair_cost(a) + plan.pair_cost(b);
    const double swapped = plan.norm(plan.from(a), plan.to(b)) + plan.norm(plan.from(b), plan.to(a));
    return kept > swapped + plan.eps_dual;
  };
  std::size_t bad = 0;
  if (k * k <= trials) {
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) bad += violates(plan.pairs[a], plan.pairs[b]) ? 1 : 0;
    }
    return bad;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    if (a != b && violates(plan.pairs[a], plan.pairs[b])) ++bad;
  }
  return bad;
}

namespace {

bool on_arcs(const MassPoint& a, const std::vector<BoundaryArc>& arcs, const Annulus& annulus) {
  const double P = annulus.boundary(a.side).perimeter();
  for (const auto& arc : arcs) {
    if (arc.side == a.side && arc.contains(a.s, P, 1e-9 * P)) return true;
  }
  return false;
}

}  // namespace

std::vector<std::ptrdiff_t> classify_rays(const TransportPlan& plan, const Annulus& annulus, const Pairing& pairing) {
  std::vector<std::ptrdiff_t> out(plan.pairs.size(), -1);
  for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
    const MassPoint& x = plan.sources.atoms[plan.pairs[k].source];
    const MassPoint& y = plan.sinks.atoms[plan.pairs[k].sink];
    for (std::size_t f = 0; f < pairing.families.size(); ++f) {
      if (on_arcs(x, pairing.families[f].sources, annulus) && on_arcs(y, pairing.families[f].sinks, annulus)) {
        out[k] = static_cast<std::ptrdiff_t>(f);
        break;
      }
    }
  }
  return out;
}

RayReport check_rays_inside(const TransportPlan& plan, const Annulus& annulus, const Pairing* pairing) {
  RayReport out;
  const auto family = pairing ? classify_rays(plan, annulus, *pairing) : std::vector<std::ptrdiff_t>{};
  for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
    const auto& p = plan.pairs[k];
    ++out.checked;
    const MassPoint& x = plan.sources.atoms[p.source];
    const MassPoint& y = plan.sinks.atoms[p.sink];
    if (!annulus.contains(x.point) || !annulus.contains(y.point)) {
      out.violations.push_back({k, "endpoint outside the annulus"});
      continue;
    }
    if (!segment_in_closure(annulus, x.point, y.point)) {
      out.violations.push_back({k, "ray crosses the hole"});
      continue;
    }
    if (pairing != nullptr && family[k] < 0) out.violations.push_back({k, "ray joins arcs of different families"});
  }
  return out;
}

std::size_t check_rays_noncrossing(const TransportPlan& plan) {
  struct Seg {
    Vec2 p, q;
    double lo_x, hi_x, lo_y, hi_y, len;
  };
  std::vector<Seg> segs;
  segs.reserve(plan.pairs.size());
  for (const auto& pr : plan.pairs) {
    const Vec2 p = plan.from(pr), q = plan.to(pr);
    segs.push_back({p, q, std::min(p.x, q.x), std::max(p.x, q.x), std::min(p.y, q.y), std::max(p.y, q.y), norm(q - p)});
  }
  std::size_t crossings = 0;
  for (std::size_t a = 0; a < segs.size(); ++a) {
    for (std::size_t b = a + 1; b < segs.size(); ++b) {
      const Seg& s = segs[a];
      const Seg& t = segs[b];
      if (s.hi_x < t.lo_x || t.hi_x < s.lo_x || s.hi_y < t.lo_y || t.hi_y < s.lo_y) continue;
      const double tol = 1e-12 * s.len * t.len;
      const double o1 = cross(s.q - s.p, t.p - s.p);
      const double o2 = cross(s.q - s.p, t.q - s.p);
      const double o3 = cross(t.q - t.p, s.p - t.p);
      const double o4 = cross(t.q - t.p, s.q - t.p);
      const bool split_t = (o1 > tol && o2 < -tol) || (o1 < -tol && o2 > tol);
      const bool split_s = (o3 > tol && o4 < -tol) || (o3 < -tol && o4 > tol);
      if (split_t && split_s) ++crossings;
    }
  }
  return crossings;
}

std::size_t split_sources(const TransportPlan& plan) {
  std::vector<std::size_t> partners(plan.sources.atoms.size(), 0);
  for (const auto& p : plan.pairs) ++partners[p.source];
  return static_cast<std::size_t>(std::count_if(partners.begin(), partners.end(), [](std::size_t c) { return c > 1; }));
}

std::vector<double> extend_potential(const TransportPlan& plan, std::span<const Vec2> queries) {
  std::vector<double> out(queries.size(), kInf);
  const std::size_t m = plan.sinks.atoms.size();
  if (m == 0) return std::vector<double>(queries.size(), 0.0);
  if (plan.norm.is_euclidean()) {
    std::vector<double> xs(m), ys(m);
    for (std::size_t j = 0; j < m; ++j) {
      xs[j] = plan.sinks.atoms[j].point.x;
      ys[j] = plan.sinks.atoms[j].point.y;
    }
    const kernels::Points pts{xs, ys};
    const auto& k = kernels::active();
    for (std::size_t q = 0; q < queries.size(); ++q) out[q] = k.min_plus_distance(queries[q], pts, plan.sink_potential.data());
    return out;
  }
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (std::size_t j = 0; j < m; ++j) {
      out[q] = std::min(out[q], plan.norm(queries[q], plan.sinks.atoms[j].point) + plan.sink_potential[j]);
    }
  }
  return out;
}

}  // namespace lgp
