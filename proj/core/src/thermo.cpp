#include "bdex/thermo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "bdex/errors.hpp"

namespace bdex {

ConservedVector conserved_of_state(LocalState xi, const VelocitySet& vs) {
  if (vs.size() < 32 && (xi.mask >> vs.size()) != 0)
    throw StructuralError("local state has occupied slots beyond the velocity set");
  ConservedVector out{StateVec::Zero(vs.dim() + 1)};
  for (std::size_t v = 0; v < vs.size(); ++v)
    if (xi.occupied(v)) out.values += vs.lifted(v);
  return out;
}

double logistic(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double theta(const ChemicalPotential& lambda, const VelocitySet& vs, std::size_t v) {
  if (lambda.values.size() != vs.dim() + 1)
    throw StructuralError("chemical potential has wrong dimension");
  return logistic(lambda.values.dot(vs.lifted(v)));
}

void thetas(const StateVec& lambda, const VelocitySet& vs, std::span<double> out) {
  for (std::size_t v = 0; v < vs.size(); ++v) out[v] = logistic(lambda.dot(vs.lifted(v)));
}

ConservedVector rho_p_of_lambda(const ChemicalPotential& lambda, const VelocitySet& vs) {
  if (lambda.values.size() != vs.dim() + 1)
    throw StructuralError("chemical potential has wrong dimension");
  ConservedVector out{StateVec::Zero(vs.dim() + 1)};
  for (std::size_t v = 0; v < vs.size(); ++v)
    out.values += logistic(lambda.values.dot(vs.lifted(v))) * vs.lifted(v);
  return out;
}

Hull::Hull(const VelocitySet& vs) {
  const int d = vs.dim();
  const int dd = d + 1;
  const std::size_t n = vs.size();
  center_ = StateVec::Zero(dd);
  for (std::size_t v = 0; v < n; ++v) center_ += 0.5 * vs.lifted(v);

  // Every d-subset of the lifted velocities spans a candidate facet hyperplane.
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + std::min<std::size_t>(d, n), true);
  std::vector<StateVec> unique;
  do {
    StateMat rows(d, dd);
    int r = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (pick[v]) rows.row(r++) = vs.lifted(v).transpose();
    // Generalized cross product: n_j = (-1)^j det(rows without column j).
    StateVec normal(dd);
    for (int j = 0; j < dd; ++j) {
      StateMat minor(d, d);
      for (int c = 0, mc = 0; c < dd; ++c)
        if (c != j) minor.col(mc++) = rows.col(c);
      normal[j] = ((j % 2) ? -1.0 : 1.0) * minor.determinant();
    }
    const double len = normal.norm();
    if (len < 1e-12) continue;
    normal /= len;
    for (int j = 0; j < dd; ++j) {
      if (std::abs(normal[j]) > 1e-14) {
        if (normal[j] < 0) normal = -normal;
        break;
      }
    }
    const bool seen = std::any_of(unique.begin(), unique.end(),
                                  [&](const StateVec& u) { return (u - normal).norm() < 1e-10; });
    if (!seen) unique.push_back(normal);
  } while (std::prev_permutation(pick.begin(), pick.end()));

  for (const auto& u : unique) {
    for (double sign : {1.0, -1.0}) {
      StateVec nrm = sign * u;
      double h = 0.0;
      for (std::size_t v = 0; v < n; ++v) h += std::max(0.0, nrm.dot(vs.lifted(v)));
      normals_.push_back(nrm);
      support_.push_back(h);
    }
  }
}

double Hull::margin(const StateVec& x) const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < normals_.size(); ++f)
    m = std::min(m, support_[f] - normals_[f].dot(x));
  return m;
}

HullMembership Hull::check(const StateVec& x) const {
  const double m = margin(x);
  return {m > kInteriorTolerance, m};
}

HullMembership check_in_U(const ConservedVector& target, const VelocitySet& vs) {
  if (target.values.size() != vs.dim() + 1)
    throw StructuralError("conserved vector has wrong dimension");
  return Hull(vs).check(target.values);
}

ChemicalPotential solve_lambda(const StateVec& target, const VelocitySet& vs,
                               const StateVec& guess, const NewtonOptions& options) {
  const int dd = vs.dim() + 1;
  const std::size_t n = vs.size();
  StateVec lambda = guess;
  StateVec residual(dd);
  std::array<double, kMaxVelocities> th{};

  auto evaluate = [&](const StateVec& l, StateVec& r) {
    r = -target;
    for (std::size_t v = 0; v < n; ++v) {
      th[v] = logistic(l.dot(vs.lifted(v)));
      r += th[v] * vs.lifted(v);
    }
  };

  evaluate(lambda, residual);
  double res_inf = residual.cwiseAbs().maxCoeff();
  double res_two = residual.norm();
  StateVec trial(dd), trial_res(dd);
  int polish = 0;
  for (int it = 0; it < options.max_iterations; ++it) {
    // Past the tolerance, a couple of extra steps take the residual to
    // rounding level; stop as soon as one fails to improve it.
    if (res_inf <= options.tolerance && ++polish > 3) return {lambda};
    StateMat jac = StateMat::Zero(dd, dd);
    for (std::size_t v = 0; v < n; ++v)
      jac.noalias() += chi(th[v]) * vs.lifted(v) * vs.lifted(v).transpose();
    const StateVec step = jac.ldlt().solve(-residual);
    if (!step.allFinite()) break;
    double scale = 1.0;
    bool accepted = false;
    const int halvings = polish > 0 ? 1 : 60;
    for (int halving = 0; halving < halvings; ++halving, scale *= 0.5) {
      trial = lambda + scale * step;
      evaluate(trial, trial_res);
      if (trial_res.norm() < res_two) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    lambda = trial;
    residual = trial_res;
    res_inf = residual.cwiseAbs().maxCoeff();
    res_two = residual.norm();
  }
  if (res_inf <= options.tolerance) return {lambda};
  throw ConvergenceError("chemical potential inversion did not converge", res_inf);
}

ChemicalPotential lambda_of_rho_p(const ConservedVector& target, const VelocitySet& vs,
                                  const NewtonOptions& options) {
  const auto membership = check_in_U(target, vs);
  if (!membership.inside)
    throw DomainError("(rho, p) is not in the interior of the hull (margin " +
                      std::to_string(membership.margin) + ")");
  return solve_lambda(target.values, vs, StateVec::Zero(vs.dim() + 1), options);
}

std::vector<double> theta_field(const ConservedVector& target, const VelocitySet& vs) {
  const auto lambda = lambda_of_rho_p(target, vs);
  std::vector<double> out(vs.size());
  thetas(lambda.values, vs, out);
  return out;
}

}  // namespace bdex
