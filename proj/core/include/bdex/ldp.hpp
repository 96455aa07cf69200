#pragma once

#include <iosfwd>
#include <vector>

#include "bdex/hydro.hpp"

namespace bdex {

/// Ordered family of vector modes e_k·T_a(t)·S(u). The canonical order is
/// nested: modes are sorted by a + m + |n₂| + |n₃|, then by time index, u₁
/// index and transverse indices, and every tuple is emitted once per
/// component k = 0..d.
struct TestBasis {
  int dim = 1;
  double horizon = 1.0;
  std::vector<Mode> modes;

  static TestBasis canonical(int dim, double horizon, std::size_t size);

  std::size_t size() const { return modes.size(); }
  TestFunction member(std::size_t j) const;
  /// Σ_j c_j G^{(j)}.
  TestFunction combine(const Eigen::VectorXd& c) const;
};

struct RateReport {
  double estimate = 0.0;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd linear;
  Eigen::MatrixXd quadratic;
  std::size_t basis_size = 0;
  double regularization = 0.0;
  double rcond = 0.0;
  std::size_t intervals = 0;
  std::size_t nodes = 0;
};

/// `key = value` lines; vectors as `[a, b, ...]`, matrices as nested brackets.
void write_report(std::ostream& out, const RateReport& report);

/// Ĵ_G(π) = linear_part(G) - ⟨G, G⟩_π, evaluated pointwise.
double j_hat(const FieldTrajectory& traj, const Eigen::MatrixXd& gamma, const TestFunction& G);

/// sup over the span of `basis` of ℓᵀc - cᵀQc = ¼ ℓᵀQ⁻¹ℓ, with Q regularized
/// by 1e-10·tr(Q)/dim. ConditioningError if the factorization fails.
RateReport rate_estimate(const FieldTrajectory& traj, const Eigen::MatrixXd& gamma,
                         const TestBasis& basis);
RateReport rate_estimate(const TrajectoryQuadrature& quad, const Eigen::MatrixXd& gamma,
                         const TestBasis& basis);

/// Scalar family T_a(t)·S(u) for the variational energy.
struct ScalarBasis {
  int time_modes = 1;
  std::vector<SpaceMode> space;

  /// sin(mπu₁), m = 1..m1_modes, times transverse Fourier modes |n_j| ≤ nt.
  static ScalarBasis canonical(int dim, int time_modes, int m1_modes, int nt = 0);
  std::size_t size() const { return static_cast<std::size_t>(time_modes) * space.size(); }
};

/// Σ_{i,k} sup_G { 2∫⟨p_k, ∂_iG⟩dt - ∫∫G² } over the span of `basis`.
double energy_Q(const FieldTrajectory& traj, const ScalarBasis& basis);

/// ‖H‖²_π.
double h_norm(const FieldTrajectory& traj, const Control& H);

struct QuadraticCostReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  RateReport rate;
};

/// lhs = rate_estimate(solve_controlled(H)), rhs = ¼‖H‖²_π on that
/// trajectory; gap = |lhs - rhs| / max(rhs, tiny).
QuadraticCostReport verify_quadratic_cost(const ConservedProfile& gamma, const BoundaryData& boundary,
                     const VelocitySet& vs, const Control& H, double T, const Grid& grid,
                     const SolverOptions& options, const TestBasis& basis);

}  // namespace bdex
