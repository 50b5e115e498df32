#pragma once

// Boundary-to-boundary optimal transport: atomization of f+ and f-, the exact
// discrete Kantorovich solve with potentials, and the plan certificates.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lgp/admissibility.hpp"
#include "lgp/boundary_data.hpp"
#include "lgp/geometry.hpp"

namespace lgp {

// Strictly convex cost norm: Euclidean or an l^p norm with 1 < p < inf.
class CostNorm {
 public:
  CostNorm() = default;
  static CostNorm euclidean() { return CostNorm(); }
  static CostNorm p_norm(double p);

  bool is_euclidean() const { return p_ == 2.0; }
  double exponent() const { return p_; }
  std::string name() const;

  double operator()(Vec2 d) const;
  double operator()(Vec2 x, Vec2 y) const { return (*this)(x - y); }

 private:
  double p_ = 2.0;
};

struct MassPoint {
  Vec2 point;
  Side side = Side::outer;
  double s = 0.0;
  double mass = 0.0;
};

struct AtomicMeasure {
  std::vector<MassPoint> atoms;

  double total_mass() const;
  bool empty() const { return atoms.empty(); }
};

struct Atomization {
  AtomicMeasure sources;  // f+
  AtomicMeasure sinks;    // f-, masses positive
};

// n equal-mass atoms per maximal run of one-signed density, at the mass
// quantiles (k + 1/2)/n; atoms of f pass through unchanged.
Atomization atomize(const Annulus& annulus, const BoundaryMeasure& f, std::size_t n);

struct PlanPair {
  std::size_t source;
  std::size_t sink;
  double mass;
};

struct TransportPlan {
  AtomicMeasure sources;
  AtomicMeasure sinks;
  std::vector<PlanPair> pairs;  // sorted by (source, sink)
  std::vector<double> source_potential;
  std::vector<double> sink_potential;
  CostNorm norm;
  double cost = 0.0;
  double eps_dual = 0.0;
  std::size_t pivots = 0;
  std::vector<std::string> warnings;

  Vec2 from(const PlanPair& p) const { return sources.atoms[p.source].point; }
  Vec2 to(const PlanPair& p) const { return sinks.atoms[p.sink].point; }
  double pair_cost(const PlanPair& p) const { return norm(from(p), to(p)); }
  double dual_objective() const;
  bool empty() const { return pairs.empty(); }
};

TransportPlan solve(AtomicMeasure sources, AtomicMeasure sinks, CostNorm norm = CostNorm::euclidean());

// Relative marginal residual: max over atoms of |plan marginal - mass| / total.
double marginal_residual(const TransportPlan& plan);
// |cost - dual objective| / max(cost, tiny).
double duality_gap(const TransportPlan& plan);
double check_support_equality(const TransportPlan& plan);
// Max over all atom pairs of phi(x) - phi(y) - cost(x, y); <= eps_dual when
// the potential is 1-Lipschitz for the cost.
double lipschitz_violation(const TransportPlan& plan);
// Exhaustive when the support has at most sqrt(trials) pairs.
std::size_t check_cyclical_monotonicity(const TransportPlan& plan, std::size_t trials, std::uint64_t seed);

struct RayViolation {
  std::size_t pair;
  std::string reason;
};

struct RayReport {
  std::size_t checked = 0;
  std::vector<RayViolation> violations;
};

// Index into pairing.families of the family whose source and sink arcs hold
// each pair's endpoints, or -1.
std::vector<std::ptrdiff_t> classify_rays(const TransportPlan& plan, const Annulus& annulus, const Pairing& pairing);

// Without a pairing only the segment containment is checked.
RayReport check_rays_inside(const TransportPlan& plan, const Annulus& annulus, const Pairing* pairing);
std::size_t check_rays_noncrossing(const TransportPlan& plan);
// Sources with more than one partner.
std::size_t split_sources(const TransportPlan& plan);

// phi(z) = min over sinks of cost(z, y) + phi(y).
std::vector<double> extend_potential(const TransportPlan& plan, std::span<const Vec2> queries);

}  // namespace lgp
