#include "lgp/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgp/error.hpp"

namespace lgp {

Grid::Grid(const Annulus& annulus, double h, double reach) : h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::invalid_input, "grid cell size must be positive");
  double extent = 0.0;
  for (Vec2 v : annulus.outer().vertices()) extent = std::max({extent, std::fabs(v.x), std::fabs(v.y)});
  half_ = static_cast<std::size_t>(std::ceil(extent / h)) + 2;
  n_ = 2 * half_;
  if (n_ > 1u << 14) throw Error(ErrorCode::invalid_input, "grid is too fine for the domain");
  reach_ = std::max(reach, 4.0 * h);

  distance_.assign(cells(), reach_);
  for (const ConvexBoundary* curve : {&annulus.outer(), &annulus.inner()}) {
    for (std::size_t k = 0; k < curve->size(); ++k) {
      const Vec2 a = curve->vertex(k);
      const Vec2 b = curve->vertex(k + 1);
      const auto cell_of = [&](double v) {
        const double c = std::floor(v / h_) + static_cast<double>(half_);
        return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(n_ - 1)));
      };
      const std::size_t i0 = cell_of(std::min(a.x, b.x) - reach_), i1 = cell_of(std::max(a.x, b.x) + reach_);
      const std::size_t j0 = cell_of(std::min(a.y, b.y) - reach_), j1 = cell_of(std::max(a.y, b.y) + reach_);
      for (std::size_t j = j0; j <= j1; ++j) {
        for (std::size_t i = i0; i <= i1; ++i) {
          const std::size_t c = index(i, j);
          distance_[c] = std::min(distance_[c], point_segment_distance(center(c), a, b));
        }
      }
    }
  }
  flags_.resize(cells());
  for (std::size_t c = 0; c < cells(); ++c) {
    if (!annulus.contains(center(c))) flags_[c] = CellFlag::exterior;
    else flags_[c] = distance_[c] < h_ ? CellFlag::band : CellFlag::interior;
  }
}

Vec2 Grid::center(std::size_t cell) const {
  const std::size_t i = cell % n_;
  const std::size_t j = cell / n_;
  return {line(static_cast<std::ptrdiff_t>(i)) + 0.5 * h_, line(static_cast<std::ptrdiff_t>(j)) + 0.5 * h_};
}

CellMeasure::CellMeasure(std::size_t cells, std::size_t components)
    : cells_(cells), components_(components), acc_(cells * components, 0) {}

void CellMeasure::deposit(std::size_t cell, std::size_t component, double mass) {
  acc_[cell * components_ + component] += static_cast<__int128>(std::nearbyint(std::ldexp(mass, 64)));
}

double CellMeasure::mass(std::size_t cell, std::size_t component) const {
  return std::ldexp(static_cast<double>(acc_[cell * components_ + component]), -64);
}

double CellMeasure::total(std::size_t component) const {
  __int128 sum = 0;
  for (std::size_t c = 0; c < cells_; ++c) sum += acc_[c * components_ + component];
  return std::ldexp(static_cast<double>(sum), -64);
}

std::vector<double> CellMeasure::density(double h, std::size_t component) const {
  std::vector<double> out(cells_);
  for (std::size_t c = 0; c < cells_; ++c) out[c] = mass(c, component) / (h * h);
  return out;
}

CellMeasure& CellMeasure::operator+=(const CellMeasure& other) {
  if (other.acc_.size() != acc_.size()) throw Error(ErrorCode::invalid_input, "cell measures on different grids");
  for (std::size_t k = 0; k < acc_.size(); ++k) acc_[k] += other.acc_[k];
  return *this;
}

Rasterization rasterize(const TransportPlan& plan, const Grid& grid) {
  Rasterization r{CellMeasure(grid.cells(), 1), CellMeasure(grid.cells(), 2)};
  const double h = grid.h();
  const double half = -grid.origin() / h;
  const auto n = static_cast<double>(grid.nx());
  std::vector<double> ts;
  for (const auto& pair : plan.pairs) {
    const Vec2 p = plan.from(pair);
    const Vec2 d = plan.to(pair) - p;
    if (d.x == 0.0 && d.y == 0.0) continue;
    const double weight = pair.mass * plan.pair_cost(pair);
    ts.assign({0.0, 1.0});
    for (int axis = 0; axis < 2; ++axis) {
      const double p0 = axis == 0 ? p.x : p.y;
      const double d0 = axis == 0 ? d.x : d.y;
      if (d0 == 0.0) continue;
      const double lo = std::min(p0, p0 + d0), hi = std::max(p0, p0 + d0);
      for (double k = std::floor(lo / h); k * h <= hi; k += 1.0) {
        const double t = (k * h - p0) / d0;
        if (t > 0.0 && t < 1.0) ts.push_back(t);
      }
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      const double tm = 0.5 * (ts[k] + ts[k + 1]);
      const double fi = std::floor((p.x + d.x * tm) / h) + half;
      const double fj = std::floor((p.y + d.y * tm) / h) + half;
      if (fi < 0.0 || fj < 0.0 || fi >= n || fj >= n) throw Error(ErrorCode::internal, "ray leaves the grid");
      const std::size_t cell = grid.index(static_cast<std::size_t>(fi), static_cast<std::size_t>(fj));
      const double dt = ts[k + 1] - ts[k];
      r.sigma.deposit(cell, 0, weight * dt);
      r.flow.deposit(cell, 0, pair.mass * d.x * dt);
      r.flow.deposit(cell, 1, pair.mass * d.y * dt);
    }
  }
  return r;
}

ScalarField rasterize_density(const TransportPlan& plan, const Grid& grid) {
  return {rasterize(plan, grid).sigma.density(grid.h())};
}

VectorField rasterize_flow(const TransportPlan& plan, const Grid& grid) {
  const Rasterization r = rasterize(plan, grid);
  return {r.flow.density(grid.h(), 0), r.flow.density(grid.h(), 1)};
}

double flow_excess(const Rasterization& r, const Grid& grid, const CostNorm& norm) {
  double worst = -std::numeric_limits<double>::infinity();
  const double a = grid.h() * grid.h();
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    const double w = norm({r.flow.mass(c, 0), r.flow.mass(c, 1)});
    worst = std::max(worst, (w - r.sigma.mass(c)) / a);
  }
  return worst;
}

ScalarField potential_field(const TransportPlan& plan, const Grid& grid) {
  std::vector<Vec2> centers(grid.cells());
  for (std::size_t c = 0; c < grid.cells(); ++c) centers[c] = grid.center(c);
  return {extend_potential(plan, centers)};
}

double check_flow_potential_alignment(const Rasterization& r, const ScalarField& phi, const Grid& grid) {
  const std::size_t n = grid.nx();
  const double h = grid.h();
  double num = 0.0, den = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const std::size_t c = grid.index(i, j);
      const double s = r.sigma.mass(c);
      if (s == 0.0) continue;
      const double gx = (phi.values[grid.index(i + 1, j)] - phi.values[grid.index(i - 1, j)]) / (2.0 * h);
      const double gy = (phi.values[grid.index(i, j + 1)] - phi.values[grid.index(i, j - 1)]) / (2.0 * h);
      num += std::hypot(r.flow.mass(c, 0) + s * gx, r.flow.mass(c, 1) + s * gy);
      den += s;
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

std::vector<TestFunction> divergence_battery(const Annulus& annulus) {
  const Vec2 c = annulus.outer().centroid();
  const double R = annulus.outer().circumradius();
  struct Poly {
    const char* name;
    double (*v)(double, double);
    Vec2 (*g)(double, double);
  };
  static const Poly polys[] = {
      {"X", [](double x, double) { return x; }, [](double, double) { return Vec2{1.0, 0.0}; }},
      {"Y", [](double, double y) { return y; }, [](double, double) { return Vec2{0.0, 1.0}; }},
      {"X^2", [](double x, double) { return x * x; }, [](double x, double) { return Vec2{2.0 * x, 0.0}; }},
      {"XY", [](double x, double y) { return x * y; }, [](double x, double y) { return Vec2{y, x}; }},
      {"Y^2-X", [](double x, double y) { return y * y - x; }, [](double, double y) { return Vec2{-1.0, 2.0 * y}; }},
      {"X^3-2XY", [](double x, double y) { return x * x * x - 2.0 * x * y; },
       [](double x, double y) { return Vec2{3.0 * x * x - 2.0 * y, -2.0 * x}; }},
  };
  struct Bump {
    const char* name;
    double (*v)(double, double);
    Vec2 (*g)(double, double);
  };
  static const Bump bumps[] = {
      {"1", [](double, double) { return 1.0; }, [](double, double) { return Vec2{0.0, 0.0}; }},
      {"gauss", [](double x, double y) { return std::exp(-(x * x + y * y)); },
       [](double x, double y) {
         const double e = std::exp(-(x * x + y * y));
         return Vec2{-2.0 * x * e, -2.0 * y * e};
       }},
      {"gauss-off",
       [](double x, double y) { return std::exp(-((x - 0.4) * (x - 0.4) + (y + 0.3) * (y + 0.3)) / 0.5); },
       [](double x, double y) {
         const double e = std::exp(-((x - 0.4) * (x - 0.4) + (y + 0.3) * (y + 0.3)) / 0.5);
         return Vec2{-4.0 * (x - 0.4) * e, -4.0 * (y + 0.3) * e};
       }},
      {"lorentz", [](double x, double y) { return 1.0 / (1.0 + (x + 0.3) * (x + 0.3) + (y - 0.2) * (y - 0.2)); },
       [](double x, double y) {
         const double q = 1.0 + (x + 0.3) * (x + 0.3) + (y - 0.2) * (y - 0.2);
         return Vec2{-2.0 * (x + 0.3) / (q * q), -2.0 * (y - 0.2) / (q * q)};
       }},
  };
  std::vector<TestFunction> out;
  for (const Poly& p : polys) {
    for (const Bump& b : bumps) {
      TestFunction t;
      t.name = std::string(p.name) + "*" + b.name;
      t.value = [p, b, c, R](Vec2 z) {
        const double x = (z.x - c.x) / R, y = (z.y - c.y) / R;
        return p.v(x, y) * b.v(x, y);
      };
      t.gradient = [p, b, c, R](Vec2 z) {
        const double x = (z.x - c.x) / R, y = (z.y - c.y) / R;
        const Vec2 g = p.g(x, y) * b.v(x, y) + b.g(x, y) * p.v(x, y);
        return g * (1.0 / R);
      };
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<DivergenceResult> check_divergence(const Rasterization& r, const TransportPlan& plan, const Grid& grid,
                                               const Annulus& annulus, std::size_t atoms_per_arc) {
  std::vector<DivergenceResult> out;
  const double f_mass = plan.sources.total_mass() + plan.sinks.total_mass();
  const double perimeter = annulus.outer().perimeter() + annulus.inner().perimeter();
  const double scale = grid.h() + perimeter / static_cast<double>(std::max<std::size_t>(atoms_per_arc, 1));
  for (const auto& t : divergence_battery(annulus)) {
    double flux = 0.0;
    double max_grad = 0.0;
    for (std::size_t c = 0; c < grid.cells(); ++c) {
      const Vec2 z = grid.center(c);
      if (grid.flag(c) != CellFlag::exterior) max_grad = std::max(max_grad, norm(t.gradient(z)));
      const double wx = r.flow.mass(c, 0), wy = r.flow.mass(c, 1);
      if (wx == 0.0 && wy == 0.0) continue;
      flux += dot(t.gradient(z), Vec2{wx, wy});
    }
    double data = 0.0;
    for (const auto& a : plan.sources.atoms) {
      data += t.value(a.point) * a.mass;
      max_grad = std::max(max_grad, norm(t.gradient(a.point)));
    }
    for (const auto& a : plan.sinks.atoms) {
      data -= t.value(a.point) * a.mass;
      max_grad = std::max(max_grad, norm(t.gradient(a.point)));
    }
    out.push_back({t.name, std::fabs(flux + data), 10.0 * max_grad * f_mass * scale});
  }
  return out;
}

double lp_norm(const ScalarField& field, const Grid& grid, double p, Region region) {
  if (!(p >= 1.0)) throw Error(ErrorCode::invalid_input, "L^p norm needs p >= 1");
  const double a = grid.h() * grid.h();
  double acc = 0.0;
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    const CellFlag f = grid.flag(c);
    if (region == Region::interior && f != CellFlag::interior) continue;
    if (region == Region::annulus && f == CellFlag::exterior) continue;
    const double v = std::fabs(field.values[c]);
    if (std::isinf(p)) acc = std::max(acc, v);
    else acc += std::pow(v, p) * a;
  }
  return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

double boundary_mass(const CellMeasure& sigma, const Grid& grid, double band) {
  if (!(band >= grid.h()) || band > grid.reach()) {
    throw Error(ErrorCode::invalid_input, "boundary band must lie between h and the grid's distance reach");
  }
  double m = 0.0;
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    if (grid.boundary_distance(c) < band) m += sigma.mass(c);
  }
  return m;
}

}  // namespace lgp
