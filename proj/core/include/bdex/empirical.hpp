#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>

#include "bdex/grid.hpp"
#include "bdex/lattice.hpp"

namespace bdex {

/// π^N: for every site x an atom at x/N carrying N^{-d}·𝑰(η_x).
struct EmpiricalMeasure {
  int scale = 0;
  int dim = 0;
  /// Lattice layout of the atoms (row = site).
  Wall wall = Wall::Reservoir;
  /// masses(x, k) = N^{-d} I_k(η_x)
  Eigen::MatrixXd masses;

  std::size_t atoms() const { return static_cast<std::size_t>(masses.rows()); }
  int components() const { return dim + 1; }
  std::array<double, kMaxDim> position(std::size_t x) const;
};

EmpiricalMeasure empirical_measure(const Configuration& eta, const Lattice& lattice,
                                   const VelocitySet& vs);

using ScalarFunction = std::function<double(const std::array<double, kMaxDim>& u)>;

/// ⟨π_k, G⟩ = Σ_x mass_k(x) G(x/N); exact for atomic measures.
double pair(const EmpiricalMeasure& measure, int k, const ScalarFunction& G);
/// All components at once.
StateVec pair(const EmpiricalMeasure& measure, const ScalarFunction& G);

/// (2L+1)^{-d} Σ_{z ∈ x+Λ_L} 𝑰(η_z). Transverse directions wrap; a block
/// crossing the x₁ walls is a DomainError.
ConservedVector block_average(const Configuration& eta, const Lattice& lattice,
                              const VelocitySet& vs, Site x, int L);

/// Ξ_ε π sampled on a grid: component k at node u is
/// π_k(B_ε(u) ∩ D) / (|B_ε(u) ∩ D| · U_ε), B_ε the sup-norm box.
struct SmoothedField {
  Grid grid;
  double eps = 0.0;
  double inflation = 1.0;
  /// values(k, node)
  Eigen::MatrixXd values;
};

/// U_ε = 1 + ε.
inline double inflation_constant(double eps) { return 1.0 + eps; }

/// Requires eps > 0 and grid spacing ≤ eps/2 (ConfigError otherwise).
SmoothedField smooth(const EmpiricalMeasure& measure, double eps, const Grid& grid);

/// The same box average applied to a field given on the nodes of `grid`
/// (values(k, node)), integrating by the trapezoid rule along each box.
SmoothedField smooth_field(const Eigen::MatrixXd& values, const Grid& grid, double eps);

/// ∫_D |f_k - g_k| by the grid quadrature, per component.
StateVec l1_distance(const SmoothedField& f, const SmoothedField& g);

/// CSV with columns u1[,u2[,u3]],pi0,...,pid; one row per node in node order.
void write_csv(std::ostream& out, const SmoothedField& field, const std::string& preamble = {});

}  // namespace bdex
