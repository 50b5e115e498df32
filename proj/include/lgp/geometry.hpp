#pragma once

// Annulus geometry: two nested strictly convex closed polylines, arclength
// parameterization, normals, visibility and arc-to-arc distances.

#include <span>
#include <vector>

#include "lgp/vec2.hpp"

namespace lgp {

inline constexpr double kEpsGeom = 1e-9;

enum class Side { outer, inner };

const char* to_string(Side side);

class ConvexBoundary {
 public:
  // Vertices in counterclockwise order, closing edge implied. Throws
  // Error(invalid_input) unless the polyline is strictly convex with at least
  // 16 vertices.
  ConvexBoundary(std::vector<Vec2> vertices, Side side);

  static ConvexBoundary circle(Vec2 center, double radius, std::size_t vertex_count, Side side);
  static ConvexBoundary ellipse(Vec2 center, double semi_x, double semi_y, double rotation,
                                std::size_t vertex_count, Side side);

  Side side() const { return side_; }
  std::size_t size() const { return vertices_.size(); }
  std::span<const Vec2> vertices() const { return vertices_; }
  Vec2 vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }
  std::span<const double> cumulative_arclength() const { return cumulative_; }
  double perimeter() const { return perimeter_; }

  // Wraps s into [0, perimeter).
  double wrap(double s) const;
  // Index of the edge containing arclength s (edge k runs from vertex k to k+1).
  std::size_t edge_at(double s) const;
  Vec2 point_at(double s) const;
  // Unit normal pointing away from the enclosed convex region. Angle bisector
  // at vertices.
  Vec2 outward_normal(double s) const;
  Vec2 edge_normal(std::size_t edge) const { return {normal_x_[edge], normal_y_[edge]}; }

  // Containment uses a fan binary search, then the signed edge distances of
  // the few edges around the located wedge.
  bool contains(Vec2 p, double eps = kEpsGeom) const;        // closed region grown by eps
  bool strictly_contains(Vec2 p, double eps = kEpsGeom) const;  // open region shrunk by eps
  double distance_to_curve(Vec2 p) const;

  // Arclength coordinate of the point on the curve closest to p.
  double project(Vec2 p) const;

  // Structure-of-arrays views used by the kernels.
  std::span<const double> xs() const { return xs_; }
  std::span<const double> ys() const { return ys_; }
  std::span<const double> normal_x() const { return normal_x_; }
  std::span<const double> normal_y() const { return normal_y_; }
  std::span<const double> offsets() const { return offsets_; }
  // offsets() - kEpsGeom: half-planes of the open region shrunk by eps.
  std::span<const double> shrunk_offsets() const { return shrunk_offsets_; }
  std::span<const double> next_xs() const { return xs_next_; }
  std::span<const double> next_ys() const { return ys_next_; }

  Vec2 centroid() const { return centroid_; }
  double inradius() const { return inradius_; }
  double circumradius() const { return circumradius_; }

 private:
  double signed_depth_fan(Vec2 p) const;

  std::vector<Vec2> vertices_;
  std::vector<double> cumulative_;
  std::vector<double> xs_, ys_, xs_next_, ys_next_;
  std::vector<double> normal_x_, normal_y_, offsets_, shrunk_offsets_;
  double perimeter_ = 0.0;
  Side side_;
  Vec2 centroid_;
  double inradius_ = 0.0;
  double circumradius_ = 0.0;
};

class Annulus {
 public:
  Annulus(ConvexBoundary outer, ConvexBoundary inner);

  const ConvexBoundary& outer() const { return outer_; }
  const ConvexBoundary& inner() const { return inner_; }
  const ConvexBoundary& boundary(Side side) const { return side == Side::outer ? outer_ : inner_; }
  double clearance() const { return clearance_; }

  // Closed annulus membership with eps slack.
  bool contains(Vec2 p, double eps = kEpsGeom) const;
  // Distance from p to the nearer of the two curves.
  double distance_to_boundary(Vec2 p) const;

 private:
  ConvexBoundary outer_;
  ConvexBoundary inner_;
  double clearance_ = 0.0;
};

// Arc running counterclockwise from s_start over `length` (0 <= length <=
// perimeter) on one boundary component.
struct BoundaryArc {
  Side side = Side::outer;
  double s_start = 0.0;
  double length = 0.0;

  double s_end() const { return s_start + length; }
  // True when s (any representative) lies on the closed arc.
  bool contains(double s, double perimeter, double eps = 1e-12) const;
  // Arclength offset of s from s_start in [0, perimeter).
  double offset_of(double s, double perimeter) const;
};

// Arc endpoints plus every polyline vertex strictly inside the arc, in order.
std::vector<Vec2> arc_sample_points(const ConvexBoundary& curve, const BoundaryArc& arc);
// The same samples as unwrapped arclength coordinates.
std::vector<double> arc_sample_arclengths(const ConvexBoundary& curve, const BoundaryArc& arc);

// For p = curve.point_at(s): the ray p + t d, t > 0, never enters the open
// region bounded by the curve (tangency allowed).
bool leaves_without_entering(const ConvexBoundary& curve, double s, Vec2 d);

// true iff [p, q] stays in the closed annulus. Tangency to the inner curve is
// inside. Throws Error(outside_annulus) when p or q is outside.
bool segment_in_closure(const Annulus& annulus, Vec2 p, Vec2 q);

// Max / min Euclidean distance between two arcs or between unions of arcs.
// Empty unions give -inf (max) and +inf (min).
double arc_max_distance(const Annulus& annulus, const BoundaryArc& a, const BoundaryArc& b);
double arc_min_distance(const Annulus& annulus, const BoundaryArc& a, const BoundaryArc& b);
double arcs_max_distance(const Annulus& annulus, std::span<const BoundaryArc> a,
                         std::span<const BoundaryArc> b);
double arcs_min_distance(const Annulus& annulus, std::span<const BoundaryArc> a,
                         std::span<const BoundaryArc> b);

}  // namespace lgp
