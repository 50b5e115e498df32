#pragma once

// Exact primal network simplex for the balanced transportation problem
//   min sum c_ij x_ij  s.t.  sum_j x_ij = a_i,  sum_i x_ij = b_j,  x >= 0
// on the complete bipartite graph, with dual potentials from the final basis.

#include <cstddef>
#include <span>
#include <vector>

namespace lgp {

struct BasicFlow {
  std::size_t source;
  std::size_t sink;
  double flow;
};

struct TransportationSolution {
  // Positive basic flows, sorted by (source, sink).
  std::vector<BasicFlow> flows;
  // u_i - v_j <= c_ij for all (i, j), with equality on every basic arc.
  std::vector<double> source_potential;
  std::vector<double> sink_potential;
  std::size_t pivots = 0;
};

// `cost` is row-major, supply.size() x demand.size(). Supplies and demands
// must be positive with equal totals up to rounding; the rounding remainder
// is left unassigned.
TransportationSolution solve_transportation(std::span<const double> supply, std::span<const double> demand,
                                            std::span<const double> cost);

}  // namespace lgp
