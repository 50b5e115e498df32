#include "lgp/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lgp/error.hpp"

namespace lgp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shift-free value, jump midpoint at a jump.
double level_at(const ComponentFunction& g, double s) {
  const double P = g.perimeter();
  for (const auto& j : g.jumps()) {
    double d = std::fabs(j.s - std::fmod(std::fmod(s, P) + P, P));
    d = std::min(d, P - d);
    if (d <= 1e-12 * P) return 0.5 * (g.base_left_limit(s) + g.base_value(s));
  }
  return g.base_value(s);
}

struct Ray {
  Vec2 x, y;
  double level;
  double key;
  double tie;
};

std::ptrdiff_t cell_of(const Grid& grid, Vec2 p) {
  const double half = -grid.origin() / grid.h();
  const double fi = std::floor(p.x / grid.h()) + half;
  const double fj = std::floor(p.y / grid.h()) + half;
  const auto n = static_cast<double>(grid.nx());
  if (fi < 0.0 || fj < 0.0 || fi >= n || fj >= n) return -1;
  return static_cast<std::ptrdiff_t>(grid.index(static_cast<std::size_t>(fi), static_cast<std::size_t>(fj)));
}

// Position of s along a list of arcs taken in order.
double position_on(const std::vector<BoundaryArc>& arcs, const MassPoint& a, const Annulus& annulus) {
  const double P = annulus.boundary(a.side).perimeter();
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    if (arcs[k].side == a.side && arcs[k].contains(a.s, P, 1e-9 * P)) {
      return static_cast<double>(k) * 2.0 * P + arcs[k].offset_of(a.s, P);
    }
  }
  return 0.0;
}

class Filler {
 public:
  Filler(const Grid& grid, std::vector<double>& u) : grid_(grid), u_(u), owner_(grid.cells(), -1), strict_(grid.cells(), 0) {}

  // Triangle a, b, c carrying interpolation weights la, lb, lc between the
  // levels lo and hi.
  void triangle(std::ptrdiff_t family, Vec2 a, Vec2 b, Vec2 c, double la, double lb, double lc, double lo,
                double hi) {
    const double area = cross(b - a, c - a);
    const double scale = std::max({norm(b - a), norm(c - a), norm(c - b)});
    if (std::fabs(area) <= 1e-14 * scale * scale) return;
    const double h = grid_.h();
    const double half = -grid_.origin() / h;
    const auto n = static_cast<double>(grid_.nx());
    const auto index_of = [&](double v) { return std::clamp(std::floor(v / h) + half, 0.0, n - 1.0); };
    const auto i0 = static_cast<std::size_t>(index_of(std::min({a.x, b.x, c.x})));
    const auto i1 = static_cast<std::size_t>(index_of(std::max({a.x, b.x, c.x})));
    const auto j0 = static_cast<std::size_t>(index_of(std::min({a.y, b.y, c.y})));
    const auto j1 = static_cast<std::size_t>(index_of(std::max({a.y, b.y, c.y})));
    for (std::size_t j = j0; j <= j1; ++j) {
      for (std::size_t i = i0; i <= i1; ++i) {
        const std::size_t cell = grid_.index(i, j);
        if (grid_.flag(cell) == CellFlag::exterior) continue;
        const Vec2 z = grid_.center(cell);
        const double wa = cross(b - z, c - z) / area;
        const double wb = cross(c - z, a - z) / area;
        const double wc = 1.0 - wa - wb;
        constexpr double in_tol = -1e-12;
        if (wa < in_tol || wb < in_tol || wc < in_tol) continue;
        const bool strict = wa > kEpsGeom && wb > kEpsGeom && wc > kEpsGeom;
        if (owner_[cell] >= 0) {
          if (owner_[cell] != family && strict && strict_[cell]) {
            std::ostringstream msg;
            msg << "cell at (" << z.x << ", " << z.y << ") is swept by two ray families";
            throw Error(ErrorCode::uncovered_cell, msg.str());
          }
          continue;
        }
        const double lambda = std::clamp(wa * la + wb * lb + wc * lc, 0.0, 1.0);
        owner_[cell] = family;
        strict_[cell] = strict;
        u_[cell] = (1.0 - lambda) * lo + lambda * hi;
        ++swept_;
      }
    }
  }

  bool owned(std::size_t cell) const { return owner_[cell] >= 0; }
  std::size_t swept() const { return swept_; }

 private:
  const Grid& grid_;
  std::vector<double>& u_;
  std::vector<std::ptrdiff_t> owner_;
  std::vector<char> strict_;
  std::size_t swept_ = 0;
};

}  // namespace

std::vector<double> assign_ray_levels(const TransportPlan& plan, const BoundaryFunction& trace) {
  std::vector<double> levels;
  levels.reserve(plan.pairs.size());
  double max_atom = 0.0;
  for (const auto* m : {&plan.sources, &plan.sinks}) {
    for (const auto& a : m->atoms) max_atom = std::max(max_atom, a.mass);
  }
  const double tv = trace.outer().total_variation() + trace.inner().total_variation();
  const double tol = 2.0 * max_atom + 1e-9 * (1.0 + tv);
  for (const auto& p : plan.pairs) {
    const MassPoint& x = plan.sources.atoms[p.source];
    const MassPoint& y = plan.sinks.atoms[p.sink];
    const MassPoint& main = (x.side == Side::outer || y.side != Side::outer) ? x : y;
    const MassPoint& other = &main == &x ? y : x;
    const double level = level_at(trace.component(main.side), main.s);
    const double check = level_at(trace.component(other.side), other.s);
    if (std::fabs(level - check) > tol) {
      std::ostringstream msg;
      msg << "ray from (" << x.point.x << ", " << x.point.y << ") to (" << y.point.x << ", " << y.point.y
          << ") joins trace values " << level << " and " << check;
      throw Error(ErrorCode::level_mismatch, msg.str());
    }
    levels.push_back(level);
  }
  return levels;
}

ReconstructedSolution reconstruct_u(const TransportPlan& plan, const Annulus& annulus, const Grid& grid,
                                    const BoundaryFunction& trace, const Pairing* pairing,
                                    const ArcDecomposition& outer, const ArcDecomposition& inner) {
  ReconstructedSolution out;
  std::vector<double> u(grid.cells(), kNaN);
  const std::vector<double> base = assign_ray_levels(plan, trace);
  out.family = pairing ? classify_rays(plan, annulus, *pairing) : std::vector<std::ptrdiff_t>(plan.pairs.size(), -1);
  const double shift = trace.outer().shift();

  Filler fill(grid, u);
  if (pairing) {
    for (std::size_t f = 0; f < pairing->families.size(); ++f) {
      const ArcFamily& fam = pairing->families[f];
      std::vector<Ray> rays;
      for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
        if (out.family[k] != static_cast<std::ptrdiff_t>(f)) continue;
        const MassPoint& x = plan.sources.atoms[plan.pairs[k].source];
        const MassPoint& y = plan.sinks.atoms[plan.pairs[k].sink];
        double tie = position_on(fam.sinks, y, annulus);
        if (fam.kind == FamilyKind::flat) tie = -tie;
        rays.push_back({x.point, y.point, base[k], position_on(fam.sources, x, annulus), tie});
      }
      if (rays.empty()) continue;
      const auto lowest = std::numeric_limits<double>::lowest();
      const auto highest = std::numeric_limits<double>::max();
      if (fam.sources.size() == 1 && fam.sinks.size() == 1) {
        // Close the swept region with the segments between the arc ends.
        const BoundaryArc& src = fam.sources.front();
        const BoundaryArc& snk = fam.sinks.front();
        const ConvexBoundary& cs = annulus.boundary(src.side);
        const ConvexBoundary& ct = annulus.boundary(snk.side);
        const BoundaryArc& on_outer = src.side == Side::outer ? src : snk;
        const ComponentFunction& g = trace.outer();
        if (fam.kind == FamilyKind::flat) {
          rays.push_back({cs.point_at(src.s_start), ct.point_at(snk.s_end()), level_at(g, src.s_start), lowest, 0.0});
          rays.push_back({cs.point_at(src.s_end()), ct.point_at(snk.s_start), level_at(g, src.s_end()), highest, 0.0});
        } else {
          rays.push_back({cs.point_at(src.s_start), ct.point_at(snk.s_start), level_at(g, on_outer.s_start), lowest, 0.0});
          rays.push_back({cs.point_at(src.s_end()), ct.point_at(snk.s_end()), level_at(g, on_outer.s_end()), highest, 0.0});
        }
      }
      std::stable_sort(rays.begin(), rays.end(), [](const Ray& a, const Ray& b) {
        return a.key != b.key ? a.key < b.key : a.tie < b.tie;
      });
      for (std::size_t k = 0; k + 1 < rays.size(); ++k) {
        const Ray& a = rays[k];
        const Ray& b = rays[k + 1];
        const auto fid = static_cast<std::ptrdiff_t>(f);
        fill.triangle(fid, a.x, a.y, b.y, 0.0, 0.0, 1.0, a.level, b.level);
        fill.triangle(fid, a.x, b.y, b.x, 0.0, 1.0, 1.0, a.level, b.level);
      }
    }
  }
  out.swept_cells = fill.swept();

  // Constant extension from the flat arcs.
  std::vector<Vec2> pts;
  std::vector<double> vals;
  for (const auto* dec : {&outer, &inner}) {
    const ConvexBoundary& curve = annulus.boundary(dec->side);
    const ComponentFunction& g = trace.component(dec->side);
    for (const auto& a : dec->arcs) {
      if (a.kind != ArcKind::flat) continue;
      for (double s : arc_sample_arclengths(curve, a.arc)) {
        pts.push_back(curve.point_at(s));
        vals.push_back(level_at(g, s));
      }
    }
  }
  if (pts.empty()) {
    for (Side side : {Side::outer, Side::inner}) {
      const ConvexBoundary& curve = annulus.boundary(side);
      for (std::size_t k = 0; k < curve.size(); ++k) {
        pts.push_back(curve.vertex(k));
        vals.push_back(level_at(trace.component(side), curve.cumulative_arclength()[k]));
      }
    }
  }
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    if (grid.flag(c) == CellFlag::exterior || fill.owned(c)) continue;
    const Vec2 z = grid.center(c);
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const Vec2 d = pts[k] - z;
      const double q = d.x * d.x + d.y * d.y;
      if (q < best) {
        best = q;
        arg = k;
      }
    }
    u[c] = vals[arg];
    ++out.extended_cells;
  }
  for (double& v : u) v += shift;
  out.u.values = std::move(u);
  out.levels = base;
  for (double& v : out.levels) v += shift;
  return out;
}

BoundaryFunction extract_trace(const ScalarField& u, const Annulus& annulus, const Grid& grid) {
  const auto sample = [&](Side side) {
    const ConvexBoundary& curve = annulus.boundary(side);
    const double sign = side == Side::outer ? -1.0 : 1.0;
    std::vector<Breakpoint> bps;
    for (std::size_t k = 0; k < curve.size(); ++k) {
      const double s = curve.cumulative_arclength()[k];
      const Vec2 q = curve.vertex(k) + curve.outward_normal(s) * (2.0 * sign * grid.h());
      const std::ptrdiff_t cell = cell_of(grid, q);
      double v = cell >= 0 ? u.values[static_cast<std::size_t>(cell)] : kNaN;
      if (std::isnan(v)) {
        // Nearest finite neighbour of the containing cell.
        double best = std::numeric_limits<double>::infinity();
        for (int dj = -2; dj <= 2; ++dj) {
          for (int di = -2; di <= 2; ++di) {
            const std::ptrdiff_t c = cell_of(grid, q + Vec2{di * grid.h(), dj * grid.h()});
            if (c < 0 || std::isnan(u.values[static_cast<std::size_t>(c)])) continue;
            const double d = norm(grid.center(static_cast<std::size_t>(c)) - q);
            if (d < best) {
              best = d;
              v = u.values[static_cast<std::size_t>(c)];
            }
          }
        }
      }
      if (std::isnan(v)) throw Error(ErrorCode::internal, "no reconstructed value near the boundary");
      bps.push_back({s, v});
    }
    bps.push_back({curve.perimeter(), bps.front().value});
    return ComponentFunction(curve.perimeter(), std::move(bps));
  };
  return BoundaryFunction(sample(Side::outer), sample(Side::inner));
}

double l1_distance(const ComponentFunction& a, const ComponentFunction& b, const ConvexBoundary& curve) {
  double total = 0.0;
  const auto cum = curve.cumulative_arclength();
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const double s0 = cum[k];
    const double s1 = k + 1 < curve.size() ? cum[k + 1] : curve.perimeter();
    const double sm = 0.5 * (s0 + s1);
    const double d0 = std::fabs(a.value(s0) - b.value(s0));
    const double dm = std::fabs(a.value(sm) - b.value(sm));
    const double d1 = std::fabs(a.value(s1) - b.value(s1));
    total += (s1 - s0) * (d0 + 4.0 * dm + d1) / 6.0;
  }
  return total;
}

std::vector<char> regular_mask(const TransportPlan& plan, const Grid& grid) {
  const std::size_t n = grid.nx();
  std::vector<char> mask(grid.cells(), 0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const std::size_t c = grid.index(i, j);
      mask[c] = grid.flag(c) == CellFlag::interior && grid.flag(grid.index(i + 1, j)) != CellFlag::exterior &&
                grid.flag(grid.index(i - 1, j)) != CellFlag::exterior &&
                grid.flag(grid.index(i, j + 1)) != CellFlag::exterior &&
                grid.flag(grid.index(i, j - 1)) != CellFlag::exterior;
    }
  }
  const double r = 2.0 * grid.h();
  for (const auto* m : {&plan.sources, &plan.sinks}) {
    for (const auto& a : m->atoms) {
      for (int dj = -3; dj <= 3; ++dj) {
        for (int di = -3; di <= 3; ++di) {
          const std::ptrdiff_t c = cell_of(grid, a.point + Vec2{di * grid.h(), dj * grid.h()});
          if (c >= 0 && norm(grid.center(static_cast<std::size_t>(c)) - a.point) <= r) mask[static_cast<std::size_t>(c)] = 0;
        }
      }
    }
  }
  return mask;
}

double check_rotated_gradient(const ScalarField& u, const Rasterization& r, const Grid& grid,
                              const std::vector<char>& mask) {
  const std::size_t n = grid.nx();
  const double h = grid.h();
  double num = 0.0, den = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const std::size_t c = grid.index(i, j);
      if (!mask[c]) continue;
      const double ux = (u.values[grid.index(i + 1, j)] - u.values[grid.index(i - 1, j)]) / (2.0 * h);
      const double uy = (u.values[grid.index(i, j + 1)] - u.values[grid.index(i, j - 1)]) / (2.0 * h);
      const double wx = r.flow.mass(c, 0) / (h * h);
      const double wy = r.flow.mass(c, 1) / (h * h);
      num += std::hypot(-uy - wx, ux - wy) * h * h;
      den += r.sigma.mass(c);
    }
  }
  if (den > 0.0) return num / den;
  return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

double w1p_seminorm(const ScalarField& u, double p, const Grid& grid, const std::vector<char>& mask) {
  if (!(p >= 1.0)) throw Error(ErrorCode::invalid_input, "seminorm needs p >= 1");
  const std::size_t n = grid.nx();
  const double h = grid.h();
  double acc = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const std::size_t c = grid.index(i, j);
      if (!mask[c]) continue;
      const double ux = (u.values[grid.index(i + 1, j)] - u.values[grid.index(i - 1, j)]) / (2.0 * h);
      const double uy = (u.values[grid.index(i, j + 1)] - u.values[grid.index(i, j - 1)]) / (2.0 * h);
      const double g = std::hypot(ux, uy);
      if (std::isinf(p)) acc = std::max(acc, g);
      else acc += std::pow(g, p) * h * h;
    }
  }
  return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

double ray_constancy(const ScalarField& u, const TransportPlan& plan, const Grid& grid) {
  // Bilinear interpolation between cell centers; the piecewise linear u is
  // reproduced exactly away from kinks, so cell quantization does not count.
  const double h = grid.h();
  const double half = -grid.origin() / h;
  const auto n = static_cast<std::ptrdiff_t>(grid.nx());
  const auto sample = [&](Vec2 p) {
    const double fx = p.x / h + half - 0.5, fy = p.y / h + half - 0.5;
    const auto i = static_cast<std::ptrdiff_t>(std::floor(fx)), j = static_cast<std::ptrdiff_t>(std::floor(fy));
    if (i < 0 || j < 0 || i + 1 >= n || j + 1 >= n) return kNaN;
    const double tx = fx - static_cast<double>(i), ty = fy - static_cast<double>(j);
    const auto at = [&](std::ptrdiff_t a, std::ptrdiff_t b) {
      return u.values[grid.index(static_cast<std::size_t>(a), static_cast<std::size_t>(b))];
    };
    return (1 - ty) * ((1 - tx) * at(i, j) + tx * at(i + 1, j)) + ty * ((1 - tx) * at(i, j + 1) + tx * at(i + 1, j + 1));
  };
  double worst = 0.0;
  for (const auto& p : plan.pairs) {
    const Vec2 x = plan.from(p), y = plan.to(p);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int k = 1; k <= 9; ++k) {
      const double v = sample(lerp(x, y, 0.1 * k));
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi >= lo) worst = std::max(worst, hi - lo);
  }
  return worst;
}

}  // namespace lgp
