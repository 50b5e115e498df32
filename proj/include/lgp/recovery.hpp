#pragma once

// Reconstruction of the least gradient function u from the transport rays:
// rays are level-set boundaries, levels come from the anchored trace, and u
// is filled between consecutive rays of each family.

#include <vector>

#include "lgp/admissibility.hpp"
#include "lgp/boundary_data.hpp"
#include "lgp/density.hpp"
#include "lgp/transport.hpp"

namespace lgp {

// Shift-free level of each plan pair: g~ at the outer endpoint (jump
// midpoint at a jump). Throws LevelMismatch when the inner endpoint disagrees
// by more than 2 * (largest atom mass) + 1e-9 (1 + TV).
std::vector<double> assign_ray_levels(const TransportPlan& plan, const BoundaryFunction& trace);

struct ReconstructedSolution {
  ScalarField u;                // NaN on exterior cells
  std::vector<double> levels;   // per plan pair, including the trace's shift
  std::vector<std::ptrdiff_t> family;  // per plan pair
  std::size_t swept_cells = 0;
  std::size_t extended_cells = 0;
};

// Throws UncoveredCell when two families' swept regions claim the same cell.
ReconstructedSolution reconstruct_u(const TransportPlan& plan, const Annulus& annulus, const Grid& grid,
                                    const BoundaryFunction& trace, const Pairing* pairing,
                                    const ArcDecomposition& outer, const ArcDecomposition& inner);

// Traces sampled at distance 2h along the inward normal from every vertex.
BoundaryFunction extract_trace(const ScalarField& u, const Annulus& annulus, const Grid& grid);

// L1 distance between two functions on one curve, by sampling at vertices
// and edge midpoints.
double l1_distance(const ComponentFunction& a, const ComponentFunction& b, const ConvexBoundary& curve);

// Interior cells with all four neighbours inside the annulus, farther than
// 2h from every ray endpoint.
std::vector<char> regular_mask(const TransportPlan& plan, const Grid& grid);

// sum |R grad_h u - w| h^2 / sum sigma h^2 over the regular mask.
double check_rotated_gradient(const ScalarField& u, const Rasterization& r, const Grid& grid,
                              const std::vector<char>& mask);

// L^p norm of |grad_h u| over the regular mask.
double w1p_seminorm(const ScalarField& u, double p, const Grid& grid, const std::vector<char>& mask);

// Largest spread of u along each ray, interpolated bilinearly from cell
// centers at parameters 0.1 .. 0.9.
double ray_constancy(const ScalarField& u, const TransportPlan& plan, const Grid& grid);

}  // namespace lgp
