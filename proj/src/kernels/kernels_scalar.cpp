#include <algorithm>
#include <cmath>
#include <limits>

#include "kernels_internal.hpp"

namespace lgp::kernels::scalar {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void distances(Vec2 p, Points pts, double* out) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = p.x - pts.x[i];
    const double dy = p.y - pts.y[i];
    out[i] = std::sqrt(dx * dx + dy * dy);
  }
}

double min_plus_distance(Vec2 z, Points pts, const double* offset) {
  double best = kInf;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = z.x - pts.x[i];
    const double dy = z.y - pts.y[i];
    best = std::min(best, std::sqrt(dx * dx + dy * dy) + offset[i]);
  }
  return best;
}

double max_distance(Points a, Points b) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double dx = a.x[i] - b.x[j];
      const double dy = a.y[i] - b.y[j];
      best = std::max(best, dx * dx + dy * dy);
    }
  }
  return std::sqrt(best);
}

double min_point_segment_distance(Vec2 p, Points from, Points to) {
  double best = kInf;
  for (std::size_t i = 0; i < from.size(); ++i) {
    const double dx = to.x[i] - from.x[i];
    const double dy = to.y[i] - from.y[i];
    const double px = p.x - from.x[i];
    const double py = p.y - from.y[i];
    const double dd = dx * dx + dy * dy;
    double t = dd > 0.0 ? (px * dx + py * dy) / dd : 0.0;
    t = std::min(1.0, std::max(0.0, t));
    const double rx = px - t * dx;
    const double ry = py - t * dy;
    best = std::min(best, rx * rx + ry * ry);
  }
  return std::sqrt(best);
}

Interval clip_halfplanes(Vec2 p, Vec2 d, const double* nx, const double* ny, const double* c,
                         std::size_t n) {
  double lo = 0.0;
  double hi = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = nx[k] * d.x + ny[k] * d.y;
    const double b = c[k] - (nx[k] * p.x + ny[k] * p.y);
    const double r = b / a;
    if (a > 0.0) {
      hi = std::min(hi, r);
    } else if (a < 0.0) {
      lo = std::max(lo, r);
    } else if (b <= 0.0) {
      hi = -kInf;
    }
  }
  return {lo, hi};
}

double sum_abs(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(v[i]);
  return s;
}

double sum_sq(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += v[i] * v[i];
  return s;
}

double max_abs(const double* v, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(v[i]));
  return m;
}

constexpr Table kTable{distances,       min_plus_distance, max_distance, min_point_segment_distance,
                       clip_halfplanes, sum_abs,           sum_sq,       max_abs};

}  // namespace

const Table& table() { return kTable; }

}  // namespace lgp::kernels::scalar
