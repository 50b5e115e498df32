#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lgp/error.hpp"
#include "lgp/geometry.hpp"
#include "oracles.hpp"

using namespace lgp;
constexpr double kPi = std::numbers::pi;

namespace {

Annulus unit_annulus(std::size_t n = 4800) {
  return Annulus(ConvexBoundary::circle({0, 0}, 2.0, n, Side::outer), ConvexBoundary::circle({0, 0}, 1.0, n, Side::inner));
}

// Arc of a sampled circle between two angles (degrees, counterclockwise).
BoundaryArc deg_arc(const ConvexBoundary& c, double a0, double a1) {
  const double P = c.perimeter();
  return {c.side(), c.wrap(a0 / 360.0 * P), (a1 - a0) / 360.0 * P};
}

}  // namespace

TEST_CASE("point_at on sampled circles") {
  const auto c2 = ConvexBoundary::circle({0, 0}, 2.0, 4096, Side::outer);
  const auto c1 = ConvexBoundary::circle({0, 0}, 1.0, 4096, Side::inner);
  CHECK(norm(c2.point_at(0.0) - Vec2{2, 0}) < 1e-9);
  CHECK(norm(c2.point_at(c2.perimeter() / 4) - Vec2{0, 2}) < 1e-3);
  CHECK(norm(c1.point_at(c1.perimeter() / 2) - Vec2{-1, 0}) < 1e-3);
  CHECK(norm(c1.point_at(c1.perimeter() * 1.5) - c1.point_at(c1.perimeter() / 2)) < 1e-12);
  CHECK(c2.perimeter() == doctest::Approx(4 * kPi).epsilon(1e-3));
  CHECK(c1.perimeter() == doctest::Approx(2 * kPi).epsilon(1e-3));
  // piecewise affine: midpoints of an edge are averages of its vertices
  const double s = 0.5 * (c2.cumulative_arclength()[10] + c2.cumulative_arclength()[11]);
  CHECK(norm(c2.point_at(s) - 0.5 * (c2.vertex(10) + c2.vertex(11))) < 1e-12);
}

TEST_CASE("outward normals are radial on circles") {
  const auto in = ConvexBoundary::circle({0, 0}, 1.0, 4800, Side::inner);
  const auto out = ConvexBoundary::circle({0, 0}, 2.0, 4800, Side::outer);
  CHECK(norm(in.outward_normal(0.0) - Vec2{1, 0}) < 1e-9);
  CHECK(norm(in.outward_normal(in.perimeter() / 4) - Vec2{0, 1}) < 1e-9);
  CHECK(norm(out.outward_normal(out.perimeter() * 0.75) - Vec2{0, -1}) < 1e-9);
  CHECK(norm(out.outward_normal(1.2345)) == doctest::Approx(1.0));
}

TEST_CASE("construction rejects non-convex or tiny polylines") {
  std::vector<Vec2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK_THROWS_AS(ConvexBoundary(square, Side::outer), Error);
  auto pts = ConvexBoundary::circle({0, 0}, 1.0, 32, Side::outer).vertices();
  std::vector<Vec2> dented(pts.begin(), pts.end());
  dented[5] = 0.9 * dented[5];
  CHECK_THROWS_AS(ConvexBoundary(dented, Side::outer), Error);
  std::vector<Vec2> cw(pts.rbegin(), pts.rend());
  CHECK_THROWS_AS(ConvexBoundary(cw, Side::outer), Error);
  // inner must sit strictly inside outer
  CHECK_THROWS_AS(Annulus(ConvexBoundary::circle({0, 0}, 1.0, 64, Side::outer),
                          ConvexBoundary::circle({0.5, 0}, 1.0, 64, Side::inner)),
                  Error);
}

TEST_CASE("clearance of concentric circles") {
  const Annulus a = unit_annulus();
  CHECK(a.clearance() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a.contains({1.5, 0}));
  CHECK_FALSE(a.contains({0.5, 0}));
  CHECK_FALSE(a.contains({2.5, 0}));
}

TEST_CASE("segment_in_closure") {
  const Annulus a = unit_annulus();
  CHECK(segment_in_closure(a, {std::sqrt(3.0) / 2, 0.5}, {std::sqrt(3.0), -1.0}));
  CHECK_FALSE(segment_in_closure(a, {1.5, 0}, {-1.5, 0}));
  CHECK(segment_in_closure(a, {0, 1.5}, {0, 1.9}));
  try {
    segment_in_closure(a, {0, 0}, {0, 1.5});
    FAIL("expected OutsideAnnulus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::outside_annulus);
  }
  // symmetry over random pairs, checked against the exact circle predicate
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(0, 2 * kPi), rad(1.05, 1.95);
  for (int i = 0; i < 500; ++i) {
    const Vec2 p = oracle::on_circle(rad(rng), ang(rng)), q = oracle::on_circle(rad(rng), ang(rng));
    const bool pq = segment_in_closure(a, p, q);
    CHECK(pq == segment_in_closure(a, q, p));
    const double d = point_segment_distance({0, 0}, p, q);
    if (d > 1.0 + 1e-3) CHECK(pq);
    if (d < 1.0 - 1e-3) CHECK_FALSE(pq);
  }
}

TEST_CASE("arc distances on the two-circle example") {
  const Annulus a = unit_annulus();
  const auto chi_p = deg_arc(a.outer(), -30, 30), gamma_p = deg_arc(a.outer(), 150, 210);
  const auto chi_m = deg_arc(a.inner(), -30, 30), gamma_m = deg_arc(a.inner(), 150, 210);
  const double r3 = std::sqrt(3.0);
  CHECK(arc_max_distance(a, chi_p, chi_m) == doctest::Approx(r3).epsilon(1e-3));
  CHECK(arc_max_distance(a, gamma_p, gamma_m) == doctest::Approx(r3).epsilon(1e-3));
  CHECK(arc_min_distance(a, chi_m, gamma_m) == doctest::Approx(r3).epsilon(1e-3));
  CHECK(arc_min_distance(a, chi_p, gamma_p) == doctest::Approx(2 * r3).epsilon(1e-3));
  // oracle on the true circles
  const double d = kPi / 6;
  CHECK(arc_max_distance(a, chi_p, chi_m) == doctest::Approx(oracle::arc_distance(2, -d, d, 1, -d, d, true, 600)).epsilon(1e-6));
  CHECK(arc_min_distance(a, chi_p, gamma_m) ==
        doctest::Approx(oracle::arc_distance(2, -d, d, 1, kPi - d, kPi + d, false, 600)).epsilon(1e-5));
  // degenerate and full arcs
  const BoundaryArc point{Side::inner, 0.3, 0.0};
  CHECK(arc_max_distance(a, point, point) == doctest::Approx(0.0));
  const BoundaryArc full{Side::inner, 0.0, a.inner().perimeter()};
  CHECK(arc_max_distance(a, full, full) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(arc_min_distance(a, chi_p, deg_arc(a.outer(), 20, 50)) == doctest::Approx(0.0));
  // symmetry and ordering
  for (auto [x, y] : {std::pair{chi_p, gamma_m}, {chi_m, gamma_p}, {chi_p, chi_m}}) {
    CHECK(arc_min_distance(a, x, y) == doctest::Approx(arc_min_distance(a, y, x)));
    CHECK(arc_max_distance(a, x, y) == doctest::Approx(arc_max_distance(a, y, x)));
    CHECK(arc_min_distance(a, x, y) <= arc_max_distance(a, x, y));
  }
}

TEST_CASE("ellipses and explicit polygons") {
  const auto e = ConvexBoundary::ellipse({0.1, -0.2}, 3.0, 2.0, 0.3, 400, Side::outer);
  CHECK(e.contains({0.1, -0.2}));
  CHECK_FALSE(e.contains({4.0, 0.0}));
  // Ramanujan's perimeter approximation
  const double a = 3, b = 2, h = (a - b) * (a - b) / ((a + b) * (a + b));
  CHECK(e.perimeter() == doctest::Approx(kPi * (a + b) * (1 + 3 * h / (10 + std::sqrt(4 - 3 * h)))).epsilon(1e-3));
  const double s = 2.7;
  CHECK(e.project(e.point_at(s)) == doctest::Approx(s).epsilon(1e-9));
  CHECK(e.distance_to_curve(e.point_at(s)) < 1e-12);
}

TEST_CASE("arc containment and wrap-around") {
  const auto c = ConvexBoundary::circle({0, 0}, 1.0, 4800, Side::inner);
  const double P = c.perimeter();
  const BoundaryArc wrap{Side::inner, P - 0.5, 1.0};
  CHECK(wrap.contains(0.2, P));
  CHECK(wrap.contains(P - 0.3, P));
  CHECK_FALSE(wrap.contains(1.0, P));
  CHECK(wrap.offset_of(0.25, P) == doctest::Approx(0.75));
  const auto pts = arc_sample_points(c, wrap);
  CHECK(norm(pts.front() - c.point_at(P - 0.5)) < 1e-12);
  CHECK(norm(pts.back() - c.point_at(0.5)) < 1e-12);
}
