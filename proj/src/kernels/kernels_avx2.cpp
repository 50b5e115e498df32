// Compiled with -mavx2 -ffp-contract=off; only reached after a CPUID check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernels_internal.hpp"

namespace lgp::kernels::avx2 {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kLanes = 4;

double hmin(__m256d v) {
  alignas(32) double t[kLanes];
  _mm256_store_pd(t, v);
  return std::min(std::min(t[0], t[1]), std::min(t[2], t[3]));
}

double hmax(__m256d v) {
  alignas(32) double t[kLanes];
  _mm256_store_pd(t, v);
  return std::max(std::max(t[0], t[1]), std::max(t[2], t[3]));
}

double hsum(__m256d v) {
  alignas(32) double t[kLanes];
  _mm256_store_pd(t, v);
  return (t[0] + t[1]) + (t[2] + t[3]);
}

void distances(Vec2 p, Points pts, double* out) {
  const std::size_t n = pts.size();
  const __m256d px = _mm256_set1_pd(p.x);
  const __m256d py = _mm256_set1_pd(p.y);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d dx = _mm256_sub_pd(px, _mm256_loadu_pd(pts.x.data() + i));
    const __m256d dy = _mm256_sub_pd(py, _mm256_loadu_pd(pts.y.data() + i));
    const __m256d r2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(r2));
  }
  for (; i < n; ++i) {
    const double dx = p.x - pts.x[i];
    const double dy = p.y - pts.y[i];
    out[i] = std::sqrt(dx * dx + dy * dy);
  }
}

double min_plus_distance(Vec2 z, Points pts, const double* offset) {
  const std::size_t n = pts.size();
  const __m256d zx = _mm256_set1_pd(z.x);
  const __m256d zy = _mm256_set1_pd(z.y);
  __m256d best = _mm256_set1_pd(kInf);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d dx = _mm256_sub_pd(zx, _mm256_loadu_pd(pts.x.data() + i));
    const __m256d dy = _mm256_sub_pd(zy, _mm256_loadu_pd(pts.y.data() + i));
    const __m256d r = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
    best = _mm256_min_pd(_mm256_add_pd(r, _mm256_loadu_pd(offset + i)), best);
  }
  double out = hmin(best);
  for (; i < n; ++i) {
    const double dx = z.x - pts.x[i];
    const double dy = z.y - pts.y[i];
    out = std::min(out, std::sqrt(dx * dx + dy * dy) + offset[i]);
  }
  return out;
}

double max_distance(Points a, Points b) {
  const std::size_t nb = b.size();
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const __m256d ax = _mm256_set1_pd(a.x[i]);
    const __m256d ay = _mm256_set1_pd(a.y[i]);
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + kLanes <= nb; j += kLanes) {
      const __m256d dx = _mm256_sub_pd(ax, _mm256_loadu_pd(b.x.data() + j));
      const __m256d dy = _mm256_sub_pd(ay, _mm256_loadu_pd(b.y.data() + j));
      acc = _mm256_max_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), acc);
    }
    best = std::max(best, hmax(acc));
    for (; j < nb; ++j) {
      const double dx = a.x[i] - b.x[j];
      const double dy = a.y[i] - b.y[j];
      best = std::max(best, dx * dx + dy * dy);
    }
  }
  return std::sqrt(best);
}

double min_point_segment_distance(Vec2 p, Points from, Points to) {
  const std::size_t n = from.size();
  const __m256d px = _mm256_set1_pd(p.x);
  const __m256d py = _mm256_set1_pd(p.y);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d best = _mm256_set1_pd(kInf);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d fx = _mm256_loadu_pd(from.x.data() + i);
    const __m256d fy = _mm256_loadu_pd(from.y.data() + i);
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(to.x.data() + i), fx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(to.y.data() + i), fy);
    const __m256d qx = _mm256_sub_pd(px, fx);
    const __m256d qy = _mm256_sub_pd(py, fy);
    const __m256d dd = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const __m256d num = _mm256_add_pd(_mm256_mul_pd(qx, dx), _mm256_mul_pd(qy, dy));
    const __m256d positive = _mm256_cmp_pd(dd, zero, _CMP_GT_OQ);
    __m256d t = _mm256_blendv_pd(zero, _mm256_div_pd(num, dd), positive);
    t = _mm256_min_pd(one, _mm256_max_pd(zero, t));
    const __m256d rx = _mm256_sub_pd(qx, _mm256_mul_pd(t, dx));
    const __m256d ry = _mm256_sub_pd(qy, _mm256_mul_pd(t, dy));
    best = _mm256_min_pd(_mm256_add_pd(_mm256_mul_pd(rx, rx), _mm256_mul_pd(ry, ry)), best);
  }
  double out = hmin(best);
  for (; i < n; ++i) {
    const double dx = to.x[i] - from.x[i];
    const double dy = to.y[i] - from.y[i];
    const double qx = p.x - from.x[i];
    const double qy = p.y - from.y[i];
    const double dd = dx * dx + dy * dy;
    double t = dd > 0.0 ? (qx * dx + qy * dy) / dd : 0.0;
    t = std::min(1.0, std::max(0.0, t));
    const double rx = qx - t * dx;
    const double ry = qy - t * dy;
    out = std::min(out, rx * rx + ry * ry);
  }
  return std::sqrt(out);
}

Interval clip_halfplanes(Vec2 p, Vec2 d, const double* nx, const double* ny, const double* c,
                         std::size_t n) {
  const __m256d px = _mm256_set1_pd(p.x);
  const __m256d py = _mm256_set1_pd(p.y);
  const __m256d dx = _mm256_set1_pd(d.x);
  const __m256d dy = _mm256_set1_pd(d.y);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d pinf = _mm256_set1_pd(kInf);
  const __m256d ninf = _mm256_set1_pd(-kInf);
  __m256d lo = zero;
  __m256d hi = _mm256_set1_pd(1.0);
  std::size_t k = 0;
  for (; k + kLanes <= n; k += kLanes) {
    const __m256d vx = _mm256_loadu_pd(nx + k);
    const __m256d vy = _mm256_loadu_pd(ny + k);
    const __m256d a = _mm256_add_pd(_mm256_mul_pd(vx, dx), _mm256_mul_pd(vy, dy));
    const __m256d b =
        _mm256_sub_pd(_mm256_loadu_pd(c + k), _mm256_add_pd(_mm256_mul_pd(vx, px), _mm256_mul_pd(vy, py)));
    const __m256d r = _mm256_div_pd(b, a);
    const __m256d up = _mm256_cmp_pd(a, zero, _CMP_GT_OQ);
    const __m256d down = _mm256_cmp_pd(a, zero, _CMP_LT_OQ);
    const __m256d flat_blocked =
        _mm256_and_pd(_mm256_cmp_pd(a, zero, _CMP_EQ_OQ), _mm256_cmp_pd(b, zero, _CMP_LE_OQ));
    hi = _mm256_min_pd(_mm256_blendv_pd(pinf, r, up), hi);
    hi = _mm256_blendv_pd(hi, ninf, flat_blocked);
    lo = _mm256_max_pd(_mm256_blendv_pd(ninf, r, down), lo);
  }
  double out_lo = hmax(lo);
  double out_hi = hmin(hi);
  for (; k < n; ++k) {
    const double a = nx[k] * d.x + ny[k] * d.y;
    const double b = c[k] - (nx[k] * p.x + ny[k] * p.y);
    const double r = b / a;
    if (a > 0.0) {
      out_hi = std::min(out_hi, r);
    } else if (a < 0.0) {
      out_lo = std::max(out_lo, r);
    } else if (b <= 0.0) {
      out_hi = -kInf;
    }
  }
  return {out_lo, out_hi};
}

double sum_abs(const double* v, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, _mm256_loadu_pd(v + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(v[i]);
  return s;
}

double sum_sq(const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d x = _mm256_loadu_pd(v + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(x, x));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += v[i] * v[i];
  return s;
}

double max_abs(const double* v, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) acc = _mm256_max_pd(_mm256_andnot_pd(sign, _mm256_loadu_pd(v + i)), acc);
  double m = hmax(acc);
  for (; i < n; ++i) m = std::max(m, std::fabs(v[i]));
  return m;
}

constexpr Table kTable{distances,       min_plus_distance, max_distance, min_point_segment_distance,
                       clip_halfplanes, sum_abs,           sum_sq,       max_abs};

}  // namespace

const Table* table() { return &kTable; }

}  // namespace lgp::kernels::avx2
