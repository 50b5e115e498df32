#include "lgp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lgp/error.hpp"
#include "lgp/kernels.hpp"

namespace lgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMinVertices = 16;

}  // namespace

const char* to_string(Side side) { return side == Side::outer ? "outer" : "inner"; }

ConvexBoundary::ConvexBoundary(std::vector<Vec2> vertices, Side side)
    : vertices_(std::move(vertices)), side_(side) {
  const std::size_t n = vertices_.size();
  if (n < kMinVertices) {
    throw Error(ErrorCode::invalid_input,
                "boundary needs at least 16 vertices, got " + std::to_string(n));
  }
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = vertices_[i] - vertices_[(i + n - 1) % n];
    const Vec2 e1 = vertices_[(i + 1) % n] - vertices_[i];
    const double l0 = norm(e0);
    const double l1 = norm(e1);
    if (l0 <= 0.0 || l1 <= 0.0) {
      throw Error(ErrorCode::invalid_input, "repeated vertex at index " + std::to_string(i));
    }
    // Normalized turn: sine of the exterior angle at vertex i.
    if (cross(e0, e1) / (l0 * l1) <= kEpsGeom) {
      throw Error(ErrorCode::invalid_input,
                  "boundary is not strictly convex (counterclockwise) at vertex " + std::to_string(i));
    }
    turning += std::atan2(cross(e0, e1), dot(e0, e1));
  }
  if (std::fabs(turning - 2.0 * std::numbers::pi) > 1e-6) {
    throw Error(ErrorCode::invalid_input, "boundary winds more than once");
  }

  cumulative_.resize(n);
  xs_.resize(n);
  ys_.resize(n);
  xs_next_.resize(n);
  ys_next_.resize(n);
  normal_x_.resize(n);
  normal_y_.resize(n);
  offsets_.resize(n);
  shrunk_offsets_.resize(n);
  double s = 0.0;
  Vec2 sum;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices_[i];
    const Vec2 b = vertices_[(i + 1) % n];
    cumulative_[i] = s;
    s += distance(a, b);
    xs_[i] = a.x;
    ys_[i] = a.y;
    xs_next_[i] = b.x;
    ys_next_[i] = b.y;
    const Vec2 nrm = normalized(Vec2{b.y - a.y, a.x - b.x});
    normal_x_[i] = nrm.x;
    normal_y_[i] = nrm.y;
    offsets_[i] = dot(nrm, a);
    shrunk_offsets_[i] = offsets_[i] - kEpsGeom;
    sum += a;
  }
  perimeter_ = s;
  centroid_ = sum / static_cast<double>(n);
  inradius_ = kInf;
  circumradius_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inradius_ = std::min(inradius_, offsets_[i] - dot(edge_normal(i), centroid_));
    circumradius_ = std::max(circumradius_, distance(vertices_[i], centroid_));
  }
}

ConvexBoundary ConvexBoundary::circle(Vec2 center, double radius, std::size_t vertex_count, Side side) {
  return ellipse(center, radius, radius, 0.0, vertex_count, side);
}

ConvexBoundary ConvexBoundary::ellipse(Vec2 center, double semi_x, double semi_y, double rotation,
                                       std::size_t vertex_count, Side side) {
  if (!(semi_x > 0.0) || !(semi_y > 0.0)) {
    throw Error(ErrorCode::invalid_input, "ellipse radii must be positive");
  }
  std::vector<Vec2> v(vertex_count);
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  for (std::size_t k = 0; k < vertex_count; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(vertex_count);
    const double px = semi_x * std::cos(t);
    const double py = semi_y * std::sin(t);
    v[k] = {center.x + c * px - s * py, center.y + s * px + c * py};
  }
  return ConvexBoundary(std::move(v), side);
}

double ConvexBoundary::wrap(double s) const {
  double w = std::fmod(s, perimeter_);
  if (w < 0.0) w += perimeter_;
  if (w >= perimeter_) w = 0.0;
  return w;
}

std::size_t ConvexBoundary::edge_at(double s) const {
  const double w = wrap(s);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), w);
  return static_cast<std::size_t>(it - cumulative_.begin()) - 1;
}

Vec2 ConvexBoundary::point_at(double s) const {
  const double w = wrap(s);
  const std::size_t k = edge_at(w);
  const Vec2 a = vertices_[k];
  const Vec2 b = vertex(k + 1);
  const double len = (k + 1 < size() ? cumulative_[k + 1] : perimeter_) - cumulative_[k];
  return lerp(a, b, (w - cumulative_[k]) / len);
}

Vec2 ConvexBoundary::outward_normal(double s) const {
  const double w = wrap(s);
  const std::size_t n = size();
  const std::size_t k = edge_at(w);
  const double tol = 1e-12 * perimeter_;
  const double end = k + 1 < n ? cumulative_[k + 1] : perimeter_;
  if (w - cumulative_[k] <= tol) {
    return normalized(edge_normal(k) + edge_normal((k + n - 1) % n));
  }
  if (end - w <= tol) {
    return normalized(edge_normal(k) + edge_normal((k + 1) % n));
  }
  return edge_normal(k);
}

double ConvexBoundary::signed_depth_fan(Vec2 p) const {
  const std::size_t n = size();
  const Vec2 v0 = vertices_[0];
  const Vec2 q = p - v0;
  std::size_t k;
  if (cross(vertices_[1] - v0, q) < 0.0) {
    k = 0;
  } else if (cross(vertices_[n - 1] - v0, q) > 0.0) {
    k = n - 1;
  } else {
    // Largest k in [1, n-2] with cross(v_k - v0, q) >= 0.
    std::size_t lo = 1;
    std::size_t hi = n - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (cross(vertices_[mid] - v0, q) >= 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    k = lo;
  }
  double depth = kInf;
  for (std::size_t off = 0; off <= 6; ++off) {
    const std::size_t j = (k + n + off - 3) % n;
    depth = std::min(depth, offsets_[j] - (normal_x_[j] * p.x + normal_y_[j] * p.y));
  }
  return depth;
}

bool ConvexBoundary::contains(Vec2 p, double eps) const { return signed_depth_fan(p) >= -eps; }

bool ConvexBoundary::strictly_contains(Vec2 p, double eps) const { return signed_depth_fan(p) > eps; }

double ConvexBoundary::distance_to_curve(Vec2 p) const {
  return kernels::active().min_point_segment_distance(p, {xs_, ys_}, {xs_next_, ys_next_});
}

double ConvexBoundary::project(Vec2 p) const {
  double best = kInf;
  double best_s = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    const Vec2 a = vertices_[k];
    const Vec2 d = vertex(k + 1) - a;
    double t = dot(p - a, d) / dot(d, d);
    t = std::clamp(t, 0.0, 1.0);
    const double dist = norm(p - a - d * t);
    if (dist < best) {
      best = dist;
      best_s = cumulative_[k] + t * norm(d);
    }
  }
  return wrap(best_s);
}

Annulus::Annulus(ConvexBoundary outer, ConvexBoundary inner) : outer_(std::move(outer)), inner_(std::move(inner)) {
  if (outer_.side() != Side::outer || inner_.side() != Side::inner) {
    throw Error(ErrorCode::invalid_input, "annulus boundaries passed with the wrong sides");
  }
  for (std::size_t i = 0; i < inner_.size(); ++i) {
    if (!outer_.strictly_contains(inner_.vertex(i))) {
      throw Error(ErrorCode::invalid_input,
                  "inner vertex " + std::to_string(i) + " is not strictly inside the outer curve");
    }
  }
  const auto& k = kernels::active();
  clearance_ = kInf;
  for (std::size_t i = 0; i < inner_.size(); ++i) {
    clearance_ = std::min(clearance_, k.min_point_segment_distance(inner_.vertex(i), {outer_.xs(), outer_.ys()},
                                                                   {outer_.next_xs(), outer_.next_ys()}));
  }
  for (std::size_t i = 0; i < outer_.size(); ++i) {
    clearance_ = std::min(clearance_, k.min_point_segment_distance(outer_.vertex(i), {inner_.xs(), inner_.ys()},
                                                                   {inner_.next_xs(), inner_.next_ys()}));
  }
  if (!(clearance_ > 0.0)) {
    throw Error(ErrorCode::invalid_input, "annulus has zero clearance");
  }
}

bool Annulus::contains(Vec2 p, double eps) const {
  return outer_.contains(p, eps) && !inner_.strictly_contains(p, eps);
}

double Annulus::distance_to_boundary(Vec2 p) const {
  return std::min(outer_.distance_to_curve(p), inner_.distance_to_curve(p));
}

bool BoundaryArc::contains(double s, double perimeter, double eps) const {
  if (length >= perimeter) return true;
  const double off = offset_of(s, perimeter);
  return off <= length + eps || off >= perimeter - eps;
}

double BoundaryArc::offset_of(double s, double perimeter) const {
  double off = std::fmod(s - s_start, perimeter);
  if (off < 0.0) off += perimeter;
  if (off >= perimeter) off = 0.0;
  return off;
}

std::vector<double> arc_sample_arclengths(const ConvexBoundary& curve, const BoundaryArc& arc) {
  std::vector<double> out;
  const double perimeter = curve.perimeter();
  const double length = std::min(arc.length, perimeter);
  out.push_back(arc.s_start);
  if (length <= 0.0) return out;
  const std::size_t n = curve.size();
  std::size_t k = (curve.edge_at(arc.s_start) + 1) % n;
  for (std::size_t visited = 0; visited < n; ++visited, k = (k + 1) % n) {
    const double off = arc.offset_of(curve.cumulative_arclength()[k], perimeter);
    if (off <= 0.0 || off >= length) {
      if (off > 0.0 || visited > 0) break;
      continue;
    }
    out.push_back(arc.s_start + off);
  }
  out.push_back(arc.s_start + length);
  return out;
}

std::vector<Vec2> arc_sample_points(const ConvexBoundary& curve, const BoundaryArc& arc) {
  const auto s = arc_sample_arclengths(curve, arc);
  std::vector<Vec2> pts;
  pts.reserve(s.size());
  for (double v : s) pts.push_back(curve.point_at(v));
  return pts;
}

bool leaves_without_entering(const ConvexBoundary& curve, double s, Vec2 d) {
  const double w = curve.wrap(s);
  const std::size_t n = curve.size();
  const std::size_t k = curve.edge_at(w);
  const double tol = 1e-12 * curve.perimeter();
  const auto cum = curve.cumulative_arclength();
  const double end = k + 1 < n ? cum[k + 1] : curve.perimeter();
  double best = dot(d, curve.edge_normal(k));
  if (w - cum[k] <= tol) best = std::max(best, dot(d, curve.edge_normal((k + n - 1) % n)));
  if (end - w <= tol) best = std::max(best, dot(d, curve.edge_normal((k + 1) % n)));
  return best >= -kEpsGeom * norm(d);
}

bool segment_in_closure(const Annulus& annulus, Vec2 p, Vec2 q) {
  if (!annulus.contains(p) || !annulus.contains(q)) {
    throw Error(ErrorCode::outside_annulus, "segment endpoint lies outside the closed annulus");
  }
  // Both ends are in the convex outer region, so only the hole matters.
  const ConvexBoundary& hole = annulus.inner();
  const double to_center = point_segment_distance(hole.centroid(), p, q);
  if (to_center > hole.circumradius() + kEpsGeom) return true;
  if (to_center < hole.inradius() - kEpsGeom) return false;
  const kernels::Interval iv = kernels::active().clip_halfplanes(
      p, q - p, hole.normal_x().data(), hole.normal_y().data(), hole.shrunk_offsets().data(), hole.size());
  return !(iv.lo < iv.hi);
}

namespace {

struct SoA {
  std::vector<double> x, y;
  explicit SoA(const std::vector<Vec2>& pts) {
    x.reserve(pts.size());
    y.reserve(pts.size());
    for (Vec2 p : pts) {
      x.push_back(p.x);
      y.push_back(p.y);
    }
  }
  kernels::Points view() const { return {x, y}; }
};

// Polyline pieces of an arc; a point arc becomes one zero-length segment.
struct Segments {
  std::vector<double> fx, fy, tx, ty;
  explicit Segments(const std::vector<Vec2>& pts) {
    if (pts.size() == 1) {
      fx = tx = {pts[0].x};
      fy = ty = {pts[0].y};
      return;
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      fx.push_back(pts[i].x);
      fy.push_back(pts[i].y);
      tx.push_back(pts[i + 1].x);
      ty.push_back(pts[i + 1].y);
    }
  }
};

double min_points_to_segments(const std::vector<Vec2>& pts, const Segments& segs) {
  const auto& k = kernels::active();
  double best = kInf;
  for (Vec2 p : pts) {
    best = std::min(best, k.min_point_segment_distance(p, {segs.fx, segs.fy}, {segs.tx, segs.ty}));
  }
  return best;
}

}  // namespace

double arc_max_distance(const Annulus& annulus, const BoundaryArc& a, const BoundaryArc& b) {
  // Distance is convex, so the max over two polylines is attained at vertices.
  const SoA pa(arc_sample_points(annulus.boundary(a.side), a));
  const SoA pb(arc_sample_points(annulus.boundary(b.side), b));
  return kernels::active().max_distance(pa.view(), pb.view());
}

double arc_min_distance(const Annulus& annulus, const BoundaryArc& a, const BoundaryArc& b) {
  // The curves never cross each other, so the polyline minimum is attained
  // between a vertex of one arc and a segment of the other.
  const auto pa = arc_sample_points(annulus.boundary(a.side), a);
  const auto pb = arc_sample_points(annulus.boundary(b.side), b);
  return std::min(min_points_to_segments(pa, Segments(pb)), min_points_to_segments(pb, Segments(pa)));
}

double arcs_max_distance(const Annulus& annulus, std::span<const BoundaryArc> a, std::span<const BoundaryArc> b) {
  double best = -kInf;
  for (const auto& x : a) {
    for (const auto& y : b) best = std::max(best, arc_max_distance(annulus, x, y));
  }
  return best;
}

double arcs_min_distance(const Annulus& annulus, std::span<const BoundaryArc> a, std::span<const BoundaryArc> b) {
  double best = kInf;
  for (const auto& x : a) {
    for (const auto& y : b) best = std::min(best, arc_min_distance(annulus, x, y));
  }
  return best;
}

}  // namespace lgp
