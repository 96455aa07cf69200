#include "bdex/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>

#include "bdex/errors.hpp"

namespace bdex {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Tuple {
  int a, m, n2, n3;
};

// Transverse Fourier indices in the order 0, 1, -1, 2, -2, ...
std::vector<int> fourier_indices(int max) {
  std::vector<int> out{0};
  for (int n = 1; n <= max; ++n) {
    out.push_back(n);
    out.push_back(-n);
  }
  return out;
}

// Distinct space modes of a basis and the index of each member's mode.
std::vector<SpaceMode> distinct_space(const TestBasis& basis, std::vector<Eigen::Index>& index) {
  std::vector<SpaceMode> out;
  index.clear();
  for (const auto& mode : basis.modes) {
    auto it = std::find(out.begin(), out.end(), mode.space);
    if (it == out.end()) {
      out.push_back(mode.space);
      it = out.end() - 1;
    }
    index.push_back(static_cast<Eigen::Index>(it - out.begin()));
  }
  return out;
}

void write_vector(std::ostream& out, const Vector& v) {
  out << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
  out << ']';
}

}  // namespace

TestBasis TestBasis::canonical(int dim, double horizon, std::size_t size) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("basis: bad dimension");
  if (!(horizon > 0.0)) throw ConfigError("basis: horizon must be positive");
  TestBasis basis{dim, horizon, {}};
  for (int level = 1; basis.modes.size() < size; ++level) {
    std::vector<Tuple> tuples;
    const int nmax = dim > 1 ? level : 0;
    for (int a = 0; a < level; ++a)
      for (int m = 1; m <= level - a; ++m)
        for (int n2 : fourier_indices(dim > 1 ? nmax : 0))
          for (int n3 : fourier_indices(dim > 2 ? nmax : 0))
            if (a + m + std::abs(n2) + std::abs(n3) == level) tuples.push_back({a, m, n2, n3});
    for (const auto& t : tuples)
      for (int k = 0; k <= dim && basis.modes.size() < size; ++k)
        basis.modes.push_back({k, t.a, {t.m, {t.n2, t.n3}}});
  }
  return basis;
}

TestFunction TestBasis::member(std::size_t j) const {
  TestFunction G(dim, horizon);
  G.add(modes.at(j), 1.0);
  return G;
}

TestFunction TestBasis::combine(const Eigen::VectorXd& c) const {
  if (static_cast<std::size_t>(c.size()) != modes.size()) throw StructuralError("basis: coefficient size");
  TestFunction G(dim, horizon);
  for (std::size_t j = 0; j < modes.size(); ++j)
    if (c[static_cast<Eigen::Index>(j)] != 0.0) G.add(modes[j], c[static_cast<Eigen::Index>(j)]);
  return G;
}

void write_report(std::ostream& out, const RateReport& r) {
  out.precision(17);
  out << "estimate = " << r.estimate << '\n';
  out << "basis_size = " << r.basis_size << '\n';
  out << "regularization = " << r.regularization << '\n';
  out << "rcond = " << r.rcond << '\n';
  out << "time_intervals = " << r.intervals << '\n';
  out << "space_nodes = " << r.nodes << '\n';
  out << "quadrature = trapezoid-space midpoint-time\n";
  out << "coefficients = ";
  write_vector(out, r.coefficients);
  out << "\nlinear = ";
  write_vector(out, r.linear);
  out << "\nquadratic = [";
  for (Eigen::Index i = 0; i < r.quadratic.rows(); ++i) {
    out << (i ? ", " : "");
    write_vector(out, r.quadratic.row(i).transpose());
  }
  out << "]\n";
}

double j_hat(const FieldTrajectory& traj, const Eigen::MatrixXd& gamma, const TestFunction& G) {
  const TrajectoryQuadrature q(traj);
  return linear_part(q, G, &gamma) - pi_inner(q, G, G);
}

RateReport rate_estimate(const FieldTrajectory& traj, const Eigen::MatrixXd& gamma,
                         const TestBasis& basis) {
  return rate_estimate(TrajectoryQuadrature(traj), gamma, basis);
}

RateReport rate_estimate(const TrajectoryQuadrature& q, const Eigen::MatrixXd& gamma,
                         const TestBasis& basis) {
  const FieldTrajectory& tr = *q.traj;
  const Grid& grid = tr.grid;
  const auto& vs = tr.velocities;
  const int d = grid.dim();
  const int nc = d + 1;
  const auto M = static_cast<Eigen::Index>(basis.size());
  const auto nv = static_cast<Eigen::Index>(vs.size());
  if (basis.dim != d) throw ConfigError("rate_estimate: basis dimension differs from trajectory");
  if (M == 0) throw ConfigError("rate_estimate: empty basis");
  if (gamma.rows() != nc || gamma.cols() != static_cast<Eigen::Index>(grid.node_count()))
    throw StructuralError("rate_estimate: gamma has the wrong shape");

  std::vector<Eigen::Index> sidx;
  const auto space = distinct_space(basis, sidx);
  const SpaceTable tab = tabulate(space, grid);
  const auto S = static_cast<Eigen::Index>(space.size());
  const double T = tr.horizon();
  const Vector& w = q.weights;

  // Linear term, grouped as (component, space mode) sums per interval.
  Vector ell = Vector::Zero(M);
  {
    const Matrix endT = (tr.frames.back() * w.asDiagonal()) * tab.value;  // nc × S
    const Matrix end0 = (gamma * w.asDiagonal()) * tab.value;
    for (Eigen::Index j = 0; j < M; ++j) {
      const auto& mode = basis.modes[static_cast<std::size_t>(j)];
      ell[j] += time_mode(mode.time, T, basis.horizon) * endT(mode.component, sidx[j]) -
                time_mode(mode.time, 0.0, basis.horizon) * end0(mode.component, sidx[j]);
    }
    const double fw = grid.face_weight();
    const Matrix wall = fw * (tr.right * tab.d1_right - tr.left * tab.d1_left);  // nc × S
    Matrix drift_w(nc, grid.node_count());
    for (std::size_t i = 0; i < q.intervals(); ++i) {
      const Matrix mw = q.mid[i] * w.asDiagonal();
      const Matrix A = mw * tab.value;
      const Matrix B = mw * tab.laplacian;
      Matrix D = Matrix::Zero(nc, S);
      for (int jd = 0; jd < d; ++jd) {
        drift_w.setZero();
        for (Eigen::Index v = 0; v < nv; ++v) {
          const double vj = vs.component(static_cast<std::size_t>(v), jd);
          if (vj == 0.0) continue;
          drift_w += vs.lifted(static_cast<std::size_t>(v)) *
                     (vj * q.chi[i].row(v).cwiseProduct(w.transpose()));
        }
        D += drift_w * tab.grad[jd];
      }
      const double dt = q.dt[i], t = q.t_mid[i];
      for (Eigen::Index j = 0; j < M; ++j) {
        const auto& mode = basis.modes[static_cast<std::size_t>(j)];
        const int k = mode.component;
        const Eigen::Index s = sidx[j];
        const double Ta = time_mode(mode.time, t, basis.horizon);
        const double dTa = time_mode_dt(mode.time, t, basis.horizon);
        ell[j] -= dt * (dTa * A(k, s) + 0.5 * Ta * B(k, s));
        ell[j] += dt * Ta * 0.5 * wall(k, s);
        ell[j] -= dt * Ta * D(k, s);
      }
    }
  }

  // Quadratic term: Q_mn = Σ dt Σ_v c_v[m] c_v[n] Σ_i (∂_iS)ᵀ diag(w χ_v) ∂_iS.
  Matrix Q = Matrix::Zero(M, M);
  {
    Matrix K(S, S);
    Vector cv(M);
    for (std::size_t i = 0; i < q.intervals(); ++i) {
      for (Eigen::Index v = 0; v < nv; ++v) {
        const Vector wx = w.cwiseProduct(q.chi[i].row(v).transpose());
        K.setZero();
        for (int jd = 0; jd < d; ++jd)
          K.noalias() += tab.grad[jd].transpose() * wx.asDiagonal() * tab.grad[jd];
        const auto& vt = vs.lifted(static_cast<std::size_t>(v));
        for (Eigen::Index j = 0; j < M; ++j) {
          const auto& mode = basis.modes[static_cast<std::size_t>(j)];
          cv[j] = time_mode(mode.time, q.t_mid[i], basis.horizon) * vt[mode.component];
        }
        for (Eigen::Index a = 0; a < M; ++a)
          for (Eigen::Index b = 0; b <= a; ++b) Q(a, b) += q.dt[i] * cv[a] * cv[b] * K(sidx[a], sidx[b]);
      }
    }
    Q.triangularView<Eigen::StrictlyUpper>() = Q.transpose();
  }

  RateReport r;
  r.linear = ell;
  r.quadratic = Q;
  r.basis_size = static_cast<std::size_t>(M);
  r.intervals = q.intervals();
  r.nodes = grid.node_count();
  const double trace = Q.trace();
  if (!std::isfinite(trace) || !ell.allFinite())
    throw ConditioningError("rate_estimate: non-finite quadratic form");
  if (trace <= 0.0) {
    if (ell.isZero(0.0)) {
      r.coefficients = Vector::Zero(M);
      return r;
    }
    throw ConditioningError("rate_estimate: quadratic form vanishes but the linear term does not");
  }
  r.regularization = 1e-10 * trace / static_cast<double>(M);
  Matrix Qr = Q;
  Qr.diagonal().array() += r.regularization;
  Eigen::LDLT<Matrix> ldlt(Qr);
  r.rcond = ldlt.rcond();
  if (ldlt.info() != Eigen::Success || !(r.rcond > 1e-15) || !ldlt.isPositive()) {
    std::ostringstream os;
    os << "rate_estimate: quadratic form is numerically singular (rcond = " << r.rcond
       << ", trace = " << trace << ", dim = " << M << ")";
    throw ConditioningError(os.str());
  }
  r.coefficients = 0.5 * ldlt.solve(ell);
  r.estimate = std::max(0.0, 0.5 * ell.dot(r.coefficients));
  return r;
}

ScalarBasis ScalarBasis::canonical(int dim, int time_modes, int m1_modes, int nt) {
  if (time_modes < 1 || m1_modes < 1 || nt < 0) throw ConfigError("energy basis: bad sizes");
  ScalarBasis b;
  b.time_modes = time_modes;
  for (int n3 : fourier_indices(dim > 2 ? nt : 0))
    for (int n2 : fourier_indices(dim > 1 ? nt : 0))
      for (int m = 1; m <= m1_modes; ++m) b.space.push_back({m, {n2, n3}});
  return b;
}

double energy_Q(const FieldTrajectory& traj, const ScalarBasis& basis) {
  if (traj.frames.size() < 2) return 0.0;
  const Grid& grid = traj.grid;
  const int d = grid.dim();
  const double T = traj.horizon();
  const int A = basis.time_modes;
  const SpaceTable tab = tabulate(basis.space, grid);
  const auto S = static_cast<Eigen::Index>(basis.space.size());
  Vector w(static_cast<Eigen::Index>(grid.node_count()));
  for (Eigen::Index n = 0; n < w.size(); ++n) w[n] = grid.weight(static_cast<std::size_t>(n));

  const Matrix Gs = tab.value.transpose() * w.asDiagonal() * tab.value;
  Matrix Gt = Matrix::Zero(A, A);
  std::vector<Matrix> B(static_cast<std::size_t>(d * (d + 1)), Matrix::Zero(A, S));
  Vector ta(A);
  for (std::size_t i = 0; i + 1 < traj.frames.size(); ++i) {
    const double dt = traj.times[i + 1] - traj.times[i];
    const double tm = 0.5 * (traj.times[i] + traj.times[i + 1]);
    for (int a = 0; a < A; ++a) ta[a] = time_mode(a, tm, T);
    Gt.noalias() += dt * ta * ta.transpose();
    const Matrix mw = 0.5 * (traj.frames[i] + traj.frames[i + 1]) * w.asDiagonal();
    for (int di = 0; di < d; ++di) {
      const Matrix P = mw * tab.grad[di];  // (d+1) × S
      for (int k = 0; k <= d; ++k) B[static_cast<std::size_t>(di * (d + 1) + k)].noalias() += dt * ta * P.row(k);
    }
  }
  const Eigen::LDLT<Matrix> ft(Gt);
  const Eigen::LDLT<Matrix> fs(Gs);
  if (ft.info() != Eigen::Success || fs.info() != Eigen::Success || !(ft.rcond() > 1e-14) ||
      !(fs.rcond() > 1e-14))
    throw ConditioningError("energy_Q: basis Gram matrix is singular on this grid");
  const Matrix gs_inv = fs.solve(Matrix::Identity(S, S));
  double total = 0.0;
  for (const auto& b : B) total += (b.transpose() * ft.solve(b)).cwiseProduct(gs_inv).sum();
  return total;
}

double h_norm(const FieldTrajectory& traj, const Control& H) {
  if (H.empty()) return 0.0;
  const TrajectoryQuadrature q(traj);
  return pi_inner(q, H, H);
}

QuadraticCostReport verify_quadratic_cost(const ConservedProfile& gamma, const BoundaryData& boundary,
                     const VelocitySet& vs, const Control& H, double T, const Grid& grid,
                     const SolverOptions& options, const TestBasis& basis) {
  const auto traj = solve_controlled(gamma, boundary, vs, H, T, grid, options);
  const TrajectoryQuadrature q(traj);
  QuadraticCostReport rep;
  rep.rate = rate_estimate(q, traj.frames.front(), basis);
  rep.lhs = rep.rate.estimate;
  rep.rhs = H.empty() ? 0.0 : 0.25 * pi_inner(q, H, H);
  rep.gap = std::abs(rep.lhs - rep.rhs) / std::max(rep.rhs, 1e-300);
  if (rep.rhs == 0.0 && rep.lhs == 0.0) rep.gap = 0.0;
  return rep;
}

}  // namespace bdex
