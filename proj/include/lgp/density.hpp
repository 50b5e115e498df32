#pragma once

// Transport density sigma and Beckmann flow w rasterized on a Cartesian grid,
// with the conservation, alignment and weak-divergence checks.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lgp/geometry.hpp"
#include "lgp/transport.hpp"

namespace lgp {

enum class CellFlag : std::uint8_t { interior, band, exterior };

// Square cells of side h aligned to integer multiples of h, symmetric about
// the origin. Cell (i, j) covers [(i - K) h, (i - K + 1) h] x [(j - K) h, ...].
class Grid {
 public:
  // `reach` bounds the boundary distances stored per cell (at least 4h).
  Grid(const Annulus& annulus, double h, double reach = 0.1);

  double h() const { return h_; }
  std::size_t nx() const { return n_; }
  std::size_t ny() const { return n_; }
  std::size_t cells() const { return n_ * n_; }
  double origin() const { return -static_cast<double>(half_) * h_; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * n_ + i; }
  Vec2 center(std::size_t cell) const;
  // Coordinate of grid line k (k = 0 .. n).
  double line(std::ptrdiff_t k) const { return static_cast<double>(k - static_cast<std::ptrdiff_t>(half_)) * h_; }
  CellFlag flag(std::size_t cell) const { return flags_[cell]; }
  // Distance from the cell center to the nearer boundary curve, capped at reach().
  double boundary_distance(std::size_t cell) const { return distance_[cell]; }
  double reach() const { return reach_; }

 private:
  double h_;
  std::size_t half_;
  std::size_t n_;
  double reach_;
  std::vector<CellFlag> flags_;
  std::vector<double> distance_;
};

struct ScalarField {
  std::vector<double> values;
};

struct VectorField {
  std::vector<double> x;
  std::vector<double> y;
};

// Exact cellwise accumulation of a (possibly vector-valued) measure in
// 2^-64 fixed point: sums do not depend on the order of deposits, so
// rasterizations of disjoint plans add exactly.
class CellMeasure {
 public:
  CellMeasure() = default;
  CellMeasure(std::size_t cells, std::size_t components);

  std::size_t cells() const { return cells_; }
  std::size_t components() const { return components_; }
  void deposit(std::size_t cell, std::size_t component, double mass);
  double mass(std::size_t cell, std::size_t component = 0) const;
  double total(std::size_t component = 0) const;
  // Cell mass / h^2.
  std::vector<double> density(double h, std::size_t component = 0) const;

  CellMeasure& operator+=(const CellMeasure& other);
  bool operator==(const CellMeasure& other) const { return acc_ == other.acc_; }

 private:
  std::size_t cells_ = 0;
  std::size_t components_ = 0;
  std::vector<__int128> acc_;
};

struct Rasterization {
  CellMeasure sigma;  // one component
  CellMeasure flow;   // two components
};

// Each pair deposits m * cost * dt on the cells the segment crosses (sigma)
// and m * (y - x) * dt (w), with dt the parameter length inside the cell.
Rasterization rasterize(const TransportPlan& plan, const Grid& grid);
ScalarField rasterize_density(const TransportPlan& plan, const Grid& grid);
VectorField rasterize_flow(const TransportPlan& plan, const Grid& grid);

// Largest norm(w) - sigma over cells, in density units. sigma carries the
// transport cost, so the bound holds in the cost norm (|w| for Euclidean).
double flow_excess(const Rasterization& r, const Grid& grid, const CostNorm& norm = CostNorm::euclidean());

ScalarField potential_field(const TransportPlan& plan, const Grid& grid);

// sum |w + sigma grad_h phi| / sum sigma over cells with four neighbours.
double check_flow_potential_alignment(const Rasterization& r, const ScalarField& phi, const Grid& grid);

struct TestFunction {
  std::string name;
  std::function<double(Vec2)> value;
  std::function<Vec2(Vec2)> gradient;
};

// Polynomials times bump profiles, scaled to the annulus.
std::vector<TestFunction> divergence_battery(const Annulus& annulus);

struct DivergenceResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool ok() const { return residual <= tolerance; }
};

// |int grad psi . w dA + int psi d(f+ - f-)| per test function, with
// tolerance 10 max|grad psi| |f| (h + perimeter / n).
std::vector<DivergenceResult> check_divergence(const Rasterization& r, const TransportPlan& plan, const Grid& grid,
                                               const Annulus& annulus, std::size_t atoms_per_arc);

enum class Region { interior, annulus, all };

// (sum |v|^p h^2)^(1/p) over the region's cells; p = inf gives the max.
double lp_norm(const ScalarField& field, const Grid& grid, double p, Region region = Region::interior);

// sigma mass in cells whose center lies within `band` of the boundary.
double boundary_mass(const CellMeasure& sigma, const Grid& grid, double band);

}  // namespace lgp
