#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bdex/velocity_set.hpp"

namespace bdex {

/// Occupation ξ ∈ {0,1}^𝓥 of one site, bit i = velocity i.
struct LocalState {
  std::uint32_t mask = 0;
  bool occupied(std::size_t v) const { return (mask >> v) & 1u; }
};

/// (ρ, p₁, …, p_d).
struct ConservedVector {
  StateVec values;

  double rho() const { return values[0]; }
  double p(int k) const { return values[k]; }
  int dim() const { return static_cast<int>(values.size()) - 1; }
};

/// Chemical potential λ = (λ₀, …, λ_d) parametrizing the product measures.
struct ChemicalPotential {
  StateVec values;
};

/// 𝑰(ξ) = (Σ ξ(v), Σ v_k ξ(v)).
ConservedVector conserved_of_state(LocalState xi, const VelocitySet& vs);

/// Numerically stable logistic 1 / (1 + e^{-s}).
double logistic(double s);

/// θ_v(λ) = logistic(λ₀ + Σ_k λ_k v_k).
double theta(const ChemicalPotential& lambda, const VelocitySet& vs, std::size_t v);

/// χ(r) = r(1 - r).
inline double chi(double r) { return r * (1.0 - r); }

/// Expected (mass, momentum) under m_λ: (Σ θ_v, Σ v_k θ_v).
ConservedVector rho_p_of_lambda(const ChemicalPotential& lambda, const VelocitySet& vs);

/// Interior test and margin for the convex hull 𝔘 of {𝑰(ξ)}.
struct HullMembership {
  bool inside;
  /// Euclidean distance to the hull boundary; negative outside.
  double margin;
};

/// The hull of {𝑰(ξ)} is the zonotope Σ_v [0, ṽ]. Its facet normals are the
/// unit normals of every d-subset of the lifted velocities, and its support
/// function is h(n) = Σ_v max(0, n·ṽ).
class Hull {
 public:
  explicit Hull(const VelocitySet& vs);

  HullMembership check(const StateVec& x) const;
  /// Signed distance to the boundary (positive inside).
  double margin(const StateVec& x) const;
  const std::vector<StateVec>& normals() const { return normals_; }
  const std::vector<double>& support() const { return support_; }
  /// Center of symmetry, Σ ṽ / 2.
  const StateVec& center() const { return center_; }

  /// Points strictly closer than this to the boundary count as outside.
  static constexpr double kInteriorTolerance = 1e-12;

 private:
  std::vector<StateVec> normals_;
  std::vector<double> support_;
  StateVec center_;
};

HullMembership check_in_U(const ConservedVector& target, const VelocitySet& vs);

struct NewtonOptions {
  int max_iterations = 100;
  double tolerance = 1e-12;
};

/// Λ: the inverse of rho_p_of_lambda on 𝔘, by damped Newton on the
/// residual with analytic Jacobian Σ_v χ(θ_v) ṽ ṽᵀ.
///
/// Throws DomainError when `target` is not interior and ConvergenceError
/// when the residual stays above tolerance.
ChemicalPotential lambda_of_rho_p(const ConservedVector& target, const VelocitySet& vs,
                                  const NewtonOptions& options = {});

/// Newton iteration without the hull test, starting from `guess`. Used by
/// the PDE solver where the caller has already checked membership.
ChemicalPotential solve_lambda(const StateVec& target, const VelocitySet& vs,
                               const StateVec& guess, const NewtonOptions& options = {});

/// θ_v(Λ(target)) for all v.
std::vector<double> theta_field(const ConservedVector& target, const VelocitySet& vs);

/// All θ_v for a given λ, written to `out` (size |𝓥|).
void thetas(const StateVec& lambda, const VelocitySet& vs, std::span<double> out);

}  // namespace bdex
