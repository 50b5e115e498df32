#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lgp/boundary_data.hpp"
#include "lgp/error.hpp"
#include "lgp/transport.hpp"
#include "oracles.hpp"

using namespace lgp;

namespace {

struct Instance {
  Annulus annulus;
  BoundaryFunction g;
};

Instance linear(double ai, double bi, double lo_i, double hi_i, double ao, double bo, double lo_o, double hi_o) {
  Annulus a(ConvexBoundary::circle({0, 0}, 2.0, 4800, Side::outer), ConvexBoundary::circle({0, 0}, 1.0, 4800, Side::inner));
  BoundaryFunction g(sample_linear_clamped(a.outer(), 0, ao, bo, lo_o, hi_o),
                     sample_linear_clamped(a.inner(), 0, ai, bi, lo_i, hi_i));
  return {std::move(a), std::move(g)};
}

Instance example_4_6() { return linear(1, 0.5, 0, 1, 0.5, 0.5, 0, 1); }

ComponentFunction from_table(const ConvexBoundary& c, const oracle::Table& t) {
  std::vector<Breakpoint> bps;
  for (std::size_t i = 0; i < t.t.size(); ++i) bps.push_back({t.t[i] * c.perimeter(), t.v[i]});
  return ComponentFunction(c.perimeter(), bps);
}

}  // namespace

TEST_CASE("tangential derivative: constants, clamp(y) and y") {
  const auto zero = linear(0, 0.3, -INFINITY, INFINITY, 0, -1, -INFINITY, INFINITY);
  CHECK(tangential_derivative(zero.g).is_zero());

  const auto ex = linear(1, 0, -INFINITY, INFINITY, 1, 0, -1, 1);
  const BoundaryMeasure f = tangential_derivative(ex.g);
  const double tv_outer = oracle::circle_tv([](Vec2 p) { return std::clamp(p.y, -1.0, 1.0); }, 2.0, 10000);
  const double tv_inner = oracle::circle_tv([](Vec2 p) { return p.y; }, 1.0, 10000);
  CHECK(tv_outer == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(f.outer.positive_mass() == doctest::Approx(tv_outer / 2).epsilon(1e-6));
  CHECK(f.outer.total_mass() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.inner.total_variation() == doctest::Approx(tv_inner).epsilon(1e-6));
  CHECK(f.inner.positive_mass() == doctest::Approx(2.0).epsilon(1e-6));
  // the inner orientation is reversed: on x > 0 the curve goes up, so f = -dg/ds < 0 there
  const double P = ex.annulus.inner().perimeter();
  const BoundaryArc right{Side::inner, P * 0.875, P * 0.25};
  CHECK(f.inner.mass_on(right) < -1.0);
  // outer clamp(y) has zero density on the flat tops
  const double Po = ex.annulus.outer().perimeter();
  const BoundaryArc top{Side::outer, Po * (1.0 / 6 + 0.01), Po * (1.0 / 6 - 0.02)};
  CHECK(f.outer.mass_on(top) == doctest::Approx(0.0));
  // dy/ds = cos(theta) on the radius-2 circle
  CHECK(f.outer.sup_density() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("jumps become atoms and count in total variation") {
  const auto c = ConvexBoundary::circle({0, 0}, 1.0, 64, Side::outer);
  const double P = c.perimeter();
  ComponentFunction g(P, {{0, 0}, {P / 2, 1}, {P, 0.5}}, {{P * 0.75, -0.5}});
  CHECK(g.total_variation() == doctest::Approx(2.0));
  CHECK(g.value(P * 0.75) == doctest::Approx(0.75 - 0.5));
  CHECK(g.base_left_limit(P * 0.75) == doctest::Approx(0.75));
  const ComponentMeasure m = tangential_derivative(g, Side::outer);
  REQUIRE(m.atoms.size() == 1);
  CHECK(m.atoms[0].mass == doctest::Approx(-0.5));
  CHECK(m.total_mass() == doctest::Approx(0.0).epsilon(1e-12));
  // closedness is enforced
  CHECK_THROWS_AS(ComponentFunction(P, {{0, 0}, {P, 1}}), Error);
}

TEST_CASE("decompose_monotone") {
  SUBCASE("two-circle example: one chi, one gamma, two flats per component") {
    const auto ex = example_4_6();
    for (Side side : {Side::outer, Side::inner}) {
      const auto d = decompose_monotone(ex.g.component(side), side);
      CHECK(d.count(ArcKind::increasing) == 1);
      CHECK(d.count(ArcKind::decreasing) == 1);
      CHECK(d.count(ArcKind::flat) == 2);
      CHECK(d.empty_flat_count() == 0);
      double cover = 0.0;
      for (const auto& a : d.arcs) cover += a.arc.length;
      CHECK(cover == doctest::Approx(d.perimeter).epsilon(1e-9));
      for (const auto& a : d.arcs) {
        if (a.kind != ArcKind::flat) CHECK(a.total_variation == doctest::Approx(1.0).epsilon(1e-9));
        if (a.kind == ArcKind::flat) CHECK(a.constant);
      }
    }
  }
  SUBCASE("constant data is one flat arc") {
    const auto z = linear(0, 2, -INFINITY, INFINITY, 0, 2, -INFINITY, INFINITY);
    const auto d = decompose_monotone(z.g.inner(), Side::inner);
    REQUIRE(d.arcs.size() == 1);
    CHECK(d.arcs[0].kind == ArcKind::flat);
    CHECK(d.arcs[0].arc.length == doctest::Approx(d.perimeter));
  }
  SUBCASE("g = y on the unit circle has empty flats at the junctions") {
    const auto ex = linear(1, 0, -INFINITY, INFINITY, 1, 0, -1, 1);
    const auto d = decompose_monotone(ex.g.inner(), Side::inner);
    CHECK(d.count(ArcKind::increasing) == 1);
    CHECK(d.count(ArcKind::decreasing) == 1);
    CHECK(d.empty_flat_count() == 2);
    REQUIRE(d.junctions.size() == 2);
    const auto& c = ex.annulus.inner();
    for (double s : d.junctions) CHECK(std::fabs(std::fabs(c.point_at(s).y) - 1.0) < 1e-9);
    for (auto i : d.indices(ArcKind::increasing)) {
      // increasing in y along the counterclockwise curve: the x > 0 half
      const auto& arc = d.arcs[i].arc;
      CHECK(c.point_at(arc.s_start + arc.length / 2).x > 0.5);
    }
  }
  SUBCASE("regrouping to a target count and ambiguity") {
    // outer: two bumps of equal height; target one rise/fall merges nothing
    // unless a zero-net grouping exists
    std::mt19937_64 rng(5);
    const auto c = ConvexBoundary::circle({0, 0}, 2.0, 960, Side::outer);
    const auto g = from_table(c, oracle::h2_table(rng, {0.5, 0.5}));
    const auto plain = decompose_monotone(g, Side::outer);
    CHECK(plain.count(ArcKind::increasing) == 2);
    const auto grouped = decompose_monotone(g, Side::outer, DecompositionTarget{1, 1});
    CHECK(grouped.count(ArcKind::increasing) == 1);
    CHECK(grouped.count(ArcKind::decreasing) == 1);
    std::size_t nonflat = 0;
    for (const auto& a : grouped.arcs) {
      if (a.kind == ArcKind::flat && !a.constant) {
        ++nonflat;
        CHECK_FALSE(a.rising.empty());
        CHECK_FALSE(a.falling.empty());
      }
    }
    CHECK(nonflat == 1);
    // no two adjacent opposite arcs share a variation: 1, 0.3, 0.5, 1.2
    const double P = c.perimeter();
    const ComponentFunction uneven(P, {{0, 0}, {0.1 * P, 0}, {0.2 * P, 1}, {0.3 * P, 1}, {0.4 * P, 0.7},
                                       {0.5 * P, 0.7}, {0.6 * P, 1.2}, {0.7 * P, 1.2}, {0.8 * P, 0}, {P, 0}});
    try {
      decompose_monotone(uneven, Side::outer, DecompositionTarget{1, 1});
      FAIL("expected DecompositionAmbiguous");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::decomposition_ambiguous);
    }
  }
}

TEST_CASE("total variation over arcs") {
  const auto ex = example_4_6();
  const auto d = decompose_monotone(ex.g.inner(), Side::inner);
  const auto& chi = d.arcs[d.indices(ArcKind::increasing)[0]].arc;
  CHECK(total_variation(ex.g.inner(), chi) == doctest::Approx(1.0).epsilon(1e-9));
  const auto clamp = linear(1, 0, -INFINITY, INFINITY, 1, 0, -1, 1);
  const BoundaryArc full{Side::outer, 0.0, clamp.annulus.outer().perimeter()};
  CHECK(total_variation(clamp.g.outer(), full) == doctest::Approx(4.0).epsilon(1e-9));
  // additivity over a split
  const double P = full.length;
  const BoundaryArc a{Side::outer, 0.3, 2.0}, b{Side::outer, 2.3, P - 2.0};
  CHECK(total_variation(clamp.g.outer(), a) + total_variation(clamp.g.outer(), b) ==
        doctest::Approx(4.0).epsilon(1e-9));
  CHECK(total_variation(sample_constant(clamp.annulus.outer(), 1.0), a) == 0.0);
}

TEST_CASE("anchor_trace") {
  SUBCASE("two-circle example recovers g with range [0, 1]") {
    const auto ex = example_4_6();
    const auto f = tangential_derivative(ex.g);
    const auto di = decompose_monotone(ex.g.inner(), Side::inner);
    const auto dout = decompose_monotone(ex.g.outer(), Side::outer);
    const auto gt = anchor_trace(f, dout, di);
    for (Side side : {Side::outer, Side::inner}) {
      const auto& c = gt.component(side);
      CHECK(c.min_value() == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(c.max_value() == doctest::Approx(1.0).epsilon(1e-9));
      const auto& orig = ex.g.component(side);
      const double offset = c.value(0.0) - orig.value(0.0);
      for (double s = 0.0; s < c.perimeter(); s += 0.01) CHECK(c.value(s) - orig.value(s) == doctest::Approx(offset));
    }
    CHECK(gt.inner_image_within_outer());
  }
  SUBCASE("zero measure gives zero") {
    const auto z = linear(0, 0, -INFINITY, INFINITY, 0, 0, -INFINITY, INFINITY);
    const auto f = tangential_derivative(z.g);
    const auto gt = anchor_trace(f, decompose_monotone(z.g.outer(), Side::outer),
                                 decompose_monotone(z.g.inner(), Side::inner));
    CHECK(gt.outer().max_value() == 0.0);
    CHECK(gt.inner().min_value() == 0.0);
  }
  SUBCASE("mass mismatch and missing anchor") {
    const auto bad = linear(1, 0.5, 0, 1, 1, 0.5, 0, 0.5);  // outer TV 1, inner TV 2
    const auto f = tangential_derivative(bad.g);
    try {
      anchor_trace(f, decompose_monotone(bad.g.outer(), Side::outer), decompose_monotone(bad.g.inner(), Side::inner));
      FAIL("expected MassMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::mass_mismatch);
    }
    const auto junction = linear(1, 0, -INFINITY, INFINITY, 1, 0, -1, 1);
    const auto fj = tangential_derivative(junction.g);
    try {
      anchor_trace(fj, decompose_monotone(junction.g.outer(), Side::outer),
                   decompose_monotone(junction.g.inner(), Side::inner));
      FAIL("expected MissingAnchor");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::missing_anchor);
    }
  }
  SUBCASE("atomized measure gives a staircase near the continuous anchor") {
    const auto ex = example_4_6();
    const auto f = tangential_derivative(ex.g);
    const auto di = decompose_monotone(ex.g.inner(), Side::inner);
    const auto dout = decompose_monotone(ex.g.outer(), Side::outer);
    const auto smooth = anchor_trace(f, dout, di);
    const Atomization at = atomize(ex.annulus, f, 64);
    BoundaryMeasure atomic;
    atomic.outer.perimeter = ex.annulus.outer().perimeter();
    atomic.inner.perimeter = ex.annulus.inner().perimeter();
    for (const auto& a : at.sources.atoms) {
      (a.side == Side::outer ? atomic.outer : atomic.inner).atoms.push_back({a.s, a.mass});
    }
    for (const auto& a : at.sinks.atoms) {
      (a.side == Side::outer ? atomic.outer : atomic.inner).atoms.push_back({a.s, -a.mass});
    }
    for (auto* m : {&atomic.outer, &atomic.inner}) {
      std::sort(m->atoms.begin(), m->atoms.end(), [](const Atom& x, const Atom& y) { return x.s < y.s; });
    }
    const auto stairs = anchor_trace(atomic, dout, di);
    for (Side side : {Side::outer, Side::inner}) {
      double worst = 0.0;
      const auto& c = stairs.component(side);
      for (double s = 0.0; s < c.perimeter(); s += 0.002) {
        worst = std::max(worst, std::fabs(c.value(s) - smooth.component(side).value(s)));
      }
      CHECK(worst <= 1.0 / 64 + 1e-9);
    }
  }
}

TEST_CASE("round trip on random (H2)-shaped data") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> hgt(0.2, 2.0);
  Annulus a(ConvexBoundary::circle({0, 0}, 2.0, 960, Side::outer), ConvexBoundary::circle({0, 0}, 1.0, 960, Side::inner));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> heights(1 + trial % 3);
    for (auto& h : heights) h = hgt(rng);
    BoundaryFunction g(from_table(a.outer(), oracle::h2_table(rng, heights)),
                       from_table(a.inner(), oracle::h2_table(rng, heights)));
    const auto f = tangential_derivative(g);
    const auto dout = decompose_monotone(g.outer(), Side::outer);
    const auto di = decompose_monotone(g.inner(), Side::inner);
    const auto back = tangential_derivative(anchor_trace(f, dout, di));
    const double eps = f.mass_tolerance();
    for (const auto* d : {&dout, &di}) {
      const auto& m0 = f.component(d->side);
      const auto& m1 = back.component(d->side);
      for (const auto& arc : d->arcs) CHECK(std::fabs(m0.mass_on(arc.arc) - m1.mass_on(arc.arc)) <= eps);
    }
  }
}

TEST_CASE("shift adds a constant on both components") {
  const auto ex = example_4_6();
  const auto s = ex.g.shifted(3.7);
  for (double t = 0.0; t < 6.0; t += 0.37) {
    CHECK(s.outer().value(t) == ex.g.outer().value(t) + 3.7);
    CHECK(s.inner().value(t) == ex.g.inner().value(t) + 3.7);
  }
}
