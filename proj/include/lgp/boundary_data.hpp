#pragma once

// Dirichlet data on the two boundary components, its tangential derivative as
// a signed boundary measure, the monotone/flat arc decomposition and the
// canonical anchored trace.
//
// Orientation: both curves are parameterized counterclockwise. On the outer
// curve f = dg/ds. On the inner curve f = -dg/ds, the derivative along the
// inner curve's orientation as part of the annulus boundary.

#include <optional>
#include <string>
#include <vector>

#include "lgp/geometry.hpp"

namespace lgp {

inline constexpr double kEpsSlope = 1e-12;
inline constexpr double kEpsMassRelative = 1e-9;

struct Breakpoint {
  double s;
  double value;
};

struct Jump {
  double s;
  double height;
};

// g on one closed curve: a piecewise-linear part c(s) through breakpoints
// (first at s = 0, last at s = perimeter) plus right-continuous jumps, plus a
// vertical shift. g(s) = c(s) + sum_{s_j <= s} h_j + shift. Closedness means
// c(P) - c(0) + sum h_j = 0.
class ComponentFunction {
 public:
  ComponentFunction() = default;
  ComponentFunction(double perimeter, std::vector<Breakpoint> breakpoints, std::vector<Jump> jumps = {},
                    double shift = 0.0);

  double perimeter() const { return perimeter_; }
  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }
  const std::vector<Jump>& jumps() const { return jumps_; }
  double shift() const { return shift_; }

  // Shift-free value; value(s) == base_value(s) + shift().
  double base_value(double s) const;
  double value(double s) const { return base_value(s) + shift_; }
  double base_left_limit(double s) const;
  double total_variation() const;
  double min_value() const;
  double max_value() const;

 private:
  double continuous_part(double s) const;
  double jumps_up_to(double s, bool inclusive) const;

  double perimeter_ = 0.0;
  std::vector<Breakpoint> breakpoints_;
  std::vector<Jump> jumps_;
  double shift_ = 0.0;
};

class BoundaryFunction {
 public:
  BoundaryFunction(ComponentFunction outer, ComponentFunction inner)
      : outer_(std::move(outer)), inner_(std::move(inner)) {}

  const ComponentFunction& component(Side side) const { return side == Side::outer ? outer_ : inner_; }
  const ComponentFunction& outer() const { return outer_; }
  const ComponentFunction& inner() const { return inner_; }

  // Same data with `c` added on both components.
  BoundaryFunction shifted(double c) const;

  // g(inner) is contained in the closed range of g(outer).
  bool inner_image_within_outer(double tol = 1e-12) const;

 private:
  ComponentFunction outer_;
  ComponentFunction inner_;
};

// clamp(ax*x + ay*y + b, lo, hi) sampled on the polyline, exact on every edge.
ComponentFunction sample_linear_clamped(const ConvexBoundary& curve, double ax, double ay, double b,
                                        double lo, double hi);
ComponentFunction sample_constant(const ConvexBoundary& curve, double value);

struct DensityPiece {
  double s0;
  double s1;
  double density;  // mass per unit length
};

struct Atom {
  double s;
  double mass;
};

struct ComponentMeasure {
  double perimeter = 0.0;
  std::vector<DensityPiece> pieces;
  std::vector<Atom> atoms;

  double positive_mass() const;
  double negative_mass() const;  // returned as a nonnegative number
  double total_mass() const { return positive_mass() - negative_mass(); }
  double total_variation() const { return positive_mass() + negative_mass(); }
  // Signed mass on the closed arc.
  double mass_on(const BoundaryArc& arc) const;
  double sup_density() const;
};

struct BoundaryMeasure {
  ComponentMeasure outer;
  ComponentMeasure inner;

  const ComponentMeasure& component(Side side) const { return side == Side::outer ? outer : inner; }
  double total_variation() const { return outer.total_variation() + inner.total_variation(); }
  bool is_zero() const { return total_variation() == 0.0; }
  // eps_mass for this measure.
  double mass_tolerance() const;
};

BoundaryMeasure tangential_derivative(const BoundaryFunction& g);
ComponentMeasure tangential_derivative(const ComponentFunction& g, Side side);

enum class ArcKind { increasing, decreasing, flat };

const char* to_string(ArcKind kind);

struct DecomposedArc {
  BoundaryArc arc;
  ArcKind kind = ArcKind::flat;
  double total_variation = 0.0;
  // For kind == flat: true when g is constant on the arc. Non-flat F arcs
  // carry their rising and falling sub-arcs.
  bool constant = true;
  bool empty = false;  // zero-length F inserted between adjacent monotone arcs
  std::vector<BoundaryArc> rising;
  std::vector<BoundaryArc> falling;
};

struct ArcDecomposition {
  Side side = Side::outer;
  double perimeter = 0.0;
  // Counterclockwise order, covering the curve.
  std::vector<DecomposedArc> arcs;
  // Points where an increasing arc meets a decreasing one with no flat part
  // between them.
  std::vector<double> junctions;

  std::vector<std::size_t> indices(ArcKind kind) const;
  std::size_t count(ArcKind kind) const { return indices(kind).size(); }
  std::size_t empty_flat_count() const;
  // Index in `arcs` of the monotone arcs, in order.
  std::vector<std::size_t> monotone_indices() const;
};

// Requested monotone arc counts; extra increasing/decreasing pairs of equal
// variation are regrouped into non-flat F arcs.
struct DecompositionTarget {
  std::size_t increasing;
  std::size_t decreasing;
};

ArcDecomposition decompose_monotone(const ComponentFunction& g, Side side,
                                    std::optional<DecompositionTarget> target = std::nullopt);

enum class Endpoints { closed, open };

double total_variation(const ComponentFunction& g, const BoundaryArc& arc, Endpoints ends = Endpoints::closed);

// g~ with tangential derivative f, zero at the start of the anchoring
// increasing arcs (outer increasing arc `outer_chi`, inner increasing arc
// `inner_chi`, both indices into ArcKind::increasing lists). A zero measure
// gives the zero function.
BoundaryFunction anchor_trace(const BoundaryMeasure& f, const ArcDecomposition& outer,
                              const ArcDecomposition& inner, std::size_t outer_chi = 0,
                              std::size_t inner_chi = 0);

}  // namespace lgp
