#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bdex/dynamics.hpp"
#include "bdex/grid.hpp"
#include "bdex/modes.hpp"
#include "bdex/sampling.hpp"

namespace bdex {

/// Grid-sampled (ρ, p): values(k, node).
struct MacroField {
  Grid grid;
  Eigen::MatrixXd values;

  static MacroField sample(const Grid& grid, const ConservedProfile& profile);
  StateVec at(std::size_t node) const { return values.col(static_cast<Eigen::Index>(node)); }
};

/// Dirichlet data a(ũ) at u₁ = 0 and b(ũ) at u₁ = 1.
struct BoundaryData {
  std::function<StateVec(std::span<const double> transverse)> a;
  std::function<StateVec(std::span<const double> transverse)> b;

  /// a = Σ_v α_v ṽ, b = Σ_v β_v ṽ.
  static BoundaryData from_reservoirs(const ReservoirProfiles& reservoirs, const VelocitySet& vs);
  static BoundaryData constant(const StateVec& a, const StateVec& b);
};

/// Frames at uniform spacing; frame 0 is γ on the grid.
///
/// Binary layout (little-endian):
///   "BDXT", uint32 version (1), uint32 d, uint32 m1, uint32 m,
///   uint32 |𝓥|, |𝓥|·d float64 velocities,
///   uint32 faces, faces·(d+1) float64 for a then the same for b,
///   uint32 frame count, then per frame: float64 time followed by
///   node_count·(d+1) float64 values, node-major.
struct FieldTrajectory {
  Grid grid;
  VelocitySet velocities;
  /// a and b on the face nodes: (k, face).
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> frames;

  double horizon() const { return times.back(); }
  std::size_t frame_count() const { return frames.size(); }
  MacroField frame(std::size_t i) const { return {grid, frames[i]}; }

  /// Trajectory sampled from a closed-form field at the given times; the
  /// wall nodes of the first frame define a and b.
  static FieldTrajectory sample(const Grid& grid, const VelocitySet& vs,
                                const std::vector<double>& times,
                                const std::function<StateVec(double, const std::array<double, kMaxDim>&)>& f);
};

void write_binary(std::ostream& out, const FieldTrajectory& traj);
FieldTrajectory read_binary(std::istream& in);
/// CSV with columns t,u1[,u2[,u3]],rho,p1..pd; one row per (frame, node).
void write_csv(std::ostream& out, const FieldTrajectory& traj, const std::string& preamble = {});

/// F(i, k) = Σ_v ṽ_k v_i χ(θ_v(Λ(ρ,p))), i < d. DomainError outside 𝔘.
StateMat flux(const StateVec& value, const VelocitySet& vs);

struct SolverOptions {
  double dt = 0.0;
  /// Macroscopic time between stored frames (rounded to a multiple of the
  /// step); 0 stores every step.
  double frame_interval = 0.0;
  NewtonOptions newton{};
  /// Excursions outside 𝔘̄ up to this size are projected back.
  double projection_tolerance = 1e-9;
};

/// Largest stable step, h²/(2(d+1)).
double max_stable_dt(const Grid& grid);

/// Method of lines: central differences in space, two-stage SSP Runge-Kutta
/// in time, Dirichlet data overwritten after each stage.
///
/// ConfigError if dt exceeds max_stable_dt; NumericalFailure if a node leaves
/// 𝔘 by more than the projection tolerance.
FieldTrajectory solve_hydro(const ConservedProfile& gamma, const BoundaryData& boundary,
                            const VelocitySet& vs, double T, const Grid& grid,
                            const SolverOptions& options);

/// ∂_t λ + Σ_i ∂_i Σ_v ṽ χ_v (v_i - ṽ·∂_i H) = ½Δλ. An empty control gives
/// solve_hydro exactly.
FieldTrajectory solve_controlled(const ConservedProfile& gamma, const BoundaryData& boundary,
                                 const VelocitySet& vs, const Control& H, double T,
                                 const Grid& grid, const SolverOptions& options);

/// Per-interval data shared by every space-time functional: midpoint in
/// time using the mid-state, trapezoid in space.
struct TrajectoryQuadrature {
  explicit TrajectoryQuadrature(const FieldTrajectory& traj);

  const FieldTrajectory* traj;
  std::vector<double> dt;
  std::vector<double> t_mid;
  /// mid(k, node) per interval
  std::vector<Eigen::MatrixXd> mid;
  /// chi(v, node) = χ(θ_v(Λ(mid))) per interval
  std::vector<Eigen::MatrixXd> chi;
  /// node weights
  Eigen::VectorXd weights;

  std::size_t intervals() const { return dt.size(); }
};

/// Linear part of the weak identity for the solved equation:
///   ⟨G(T),λ(T)⟩ - ⟨G(0),γ⟩ - ∫∫λ·(∂_tG + ½ΔG)
///   + ½∫b·∂₁G(·,1)dS - ½∫a·∂₁G(·,0)dS - ∫∫Σ_v χ_v Σ_i v_i ṽ·∂_iG.
/// `gamma` defaults to frame 0.
double linear_part(const TrajectoryQuadrature& q, const TestFunction& G,
                   const Eigen::MatrixXd* gamma = nullptr);

/// ⟨G, H⟩_π = ∫∫ Σ_v χ_v Σ_i (ṽ·∂_iG)(ṽ·∂_iH).
double pi_inner(const TrajectoryQuadrature& q, const TestFunction& G, const TestFunction& H);

/// Signed residual of the weak formulation against G.
double weak_residual(const FieldTrajectory& traj, const TestFunction& G);

/// Σ_k ∫∫ |∇p_k|² with central differences (one-sided second order at the
/// walls), trapezoid in space and in time.
double field_energy(const FieldTrajectory& traj);

}  // namespace bdex
