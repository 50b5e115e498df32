#pragma once

// Data-parallel inner loops shared by the geometry, transport and density
// modules. Every kernel has a portable scalar reference and an AVX2 variant;
// the variant is chosen once at startup from CPUID and can be pinned with the
// LGP_SIMD environment variable ("scalar" or "avx2").
//
// Kernels that only use +, -, *, /, sqrt, min and max return results that are
// bit-identical across variants. The summing reductions (sum_abs, sum_sq) are
// equal up to reassociation.

#include <cstddef>
#include <span>

#include "lgp/vec2.hpp"

namespace lgp::kernels {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa);

// Structure-of-arrays point list.
struct Points {
  std::span<const double> x;
  std::span<const double> y;
  std::size_t size() const { return x.size(); }
};

struct Interval {
  double lo;
  double hi;
};

struct Table {
  // out[i] = |p - pts[i]|
  void (*distances)(Vec2 p, Points pts, double* out);
  // min_i |z - pts[i]| + offset[i]
  double (*min_plus_distance)(Vec2 z, Points pts, const double* offset);
  // max over the cross product of |a[i] - b[j]|
  double (*max_distance)(Points a, Points b);
  // min_i dist(p, [from[i], to[i]])
  double (*min_point_segment_distance)(Vec2 p, Points from, Points to);
  // Intersection of [0, 1] with {t : nx[k]*(p.x+t*d.x) + ny[k]*(p.y+t*d.y) < c[k]}
  // over all k. Empty results have lo >= hi.
  Interval (*clip_halfplanes)(Vec2 p, Vec2 d, const double* nx, const double* ny, const double* c,
                              std::size_t n);
  double (*sum_abs)(const double* v, std::size_t n);
  double (*sum_sq)(const double* v, std::size_t n);
  double (*max_abs)(const double* v, std::size_t n);
};

bool isa_supported(Isa isa);
const Table& table(Isa isa);

// Table selected for this process.
const Table& active();
Isa active_isa();

}  // namespace lgp::kernels
