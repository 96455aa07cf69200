#include "bdex/hydro.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "bdex/errors.hpp"

namespace bdex {

namespace {

using Matrix = Eigen::MatrixXd;

Matrix face_values(const Grid& grid, const std::function<StateVec(std::span<const double>)>& g) {
  Matrix out(grid.dim() + 1, static_cast<Eigen::Index>(grid.transverse_count()));
  for (std::size_t t = 0; t < grid.transverse_count(); ++t) {
    const auto tp = grid.transverse_position(t);
    const StateVec v = g(std::span<const double>(tp.data(), static_cast<std::size_t>(grid.dim() - 1)));
    if (v.size() != grid.dim() + 1) throw ConfigError("boundary data has the wrong number of components");
    out.col(static_cast<Eigen::Index>(t)) = v;
  }
  return out;
}

// Moves x toward the hull center until its margin is `target`.
StateVec project_radially(const StateVec& x, const Hull& hull, double target) {
  const StateVec& c = hull.center();
  const StateVec dir = x - c;
  double s = 1.0;
  for (std::size_t f = 0; f < hull.normals().size(); ++f) {
    const double nd = hull.normals()[f].dot(dir);
    if (nd <= 0.0) continue;
    const double room = hull.support()[f] - hull.normals()[f].dot(c) - target;
    s = std::min(s, room / nd);
  }
  return c + std::max(s, 0.0) * dir;
}

std::string where(const Grid& grid, std::size_t node, double t) {
  std::ostringstream os;
  const auto u = grid.position(node);
  os << "node " << node << " (u = " << u[0];
  for (int j = 1; j < grid.dim(); ++j) os << ", " << u[j];
  os << ") at t = " << t;
  return os.str();
}

class Stepper {
 public:
  Stepper(const Grid& grid, const VelocitySet& vs, const Control& H, const Matrix& left,
          const Matrix& right, const SolverOptions& opts)
      : grid_(grid), vs_(vs), hull_(vs), H_(H), left_(left), right_(right), opts_(opts) {
    const auto nodes = static_cast<Eigen::Index>(grid.node_count());
    const int nc = grid.dim() + 1;
    lambda_ = Matrix::Zero(nc, nodes);
    chi_ = Matrix::Zero(static_cast<Eigen::Index>(vs.size()), nodes);
    for (int i = 0; i < grid.dim(); ++i) {
      flux_[i] = Matrix::Zero(nc, nodes);
      gradH_[i] = Matrix::Zero(nc, nodes);
    }
    std::vector<SpaceMode> modes;
    for (const auto& term : H.terms()) modes.push_back(term.mode.space);
    if (!modes.empty()) table_ = tabulate(modes, grid);
    theta_.resize(vs.size());
    for (std::size_t t = 0; t < grid.transverse_count(); ++t) {
      set_lambda(grid.node(0, t), lambda_of_rho_p({left_.col(static_cast<Eigen::Index>(t))}, vs).values);
      set_lambda(grid.node(grid.m1() - 1, t),
                 lambda_of_rho_p({right_.col(static_cast<Eigen::Index>(t))}, vs).values);
    }
  }

  void impose_walls(Matrix& f) const {
    for (std::size_t t = 0; t < grid_.transverse_count(); ++t) {
      const auto c = static_cast<Eigen::Index>(t);
      f.col(static_cast<Eigen::Index>(grid_.node(0, t))) = left_.col(c);
      f.col(static_cast<Eigen::Index>(grid_.node(grid_.m1() - 1, t))) = right_.col(c);
    }
  }

  // Interior nodes must lie in 𝔘; tiny excursions are pulled back inside.
  void enforce_hull(Matrix& f, double t) const {
    for (std::size_t n = 0; n < grid_.node_count(); ++n) {
      if (grid_.on_wall(n)) continue;
      const auto c = static_cast<Eigen::Index>(n);
      const StateVec x = f.col(c);
      if (!x.allFinite()) throw NumericalFailure("hydro solver: non-finite value at " + where(grid_, n, t));
      const double margin = hull_.margin(x);
      if (margin >= Hull::kInteriorTolerance) continue;
      if (margin < -opts_.projection_tolerance) {
        std::ostringstream os;
        os << "hydro solver: value leaves the hull by " << -margin << " at " << where(grid_, n, t);
        throw NumericalFailure(os.str());
      }
      f.col(c) = project_radially(x, hull_, 2.0 * Hull::kInteriorTolerance);
    }
  }

  void rhs(const Matrix& f, double t, Matrix& out) {
    const int d = grid_.dim();
    const std::size_t nv = vs_.size();
    for (std::size_t n = 0; n < grid_.node_count(); ++n) {
      if (grid_.on_wall(n)) continue;
      const auto c = static_cast<Eigen::Index>(n);
      try {
        lambda_.col(c) = solve_lambda(f.col(c), vs_, lambda_.col(c), opts_.newton).values;
      } catch (const ConvergenceError& e) {
        throw NumericalFailure(std::string("hydro solver: ") + e.what() + " at " + where(grid_, n, t));
      }
      update_chi(n);
    }
    update_control(t);
    for (int i = 0; i < d; ++i) {
      for (std::size_t n = 0; n < grid_.node_count(); ++n) {
        const auto c = static_cast<Eigen::Index>(n);
        StateVec F = StateVec::Zero(d + 1);
        for (std::size_t v = 0; v < nv; ++v) {
          const StateVec& vt = vs_.lifted(v);
          double drift = vs_.component(v, i);
          if (!H_.empty()) drift -= vt.dot(gradH_[i].col(c));
          F += (chi_(static_cast<Eigen::Index>(v), c) * drift) * vt;
        }
        flux_[i].col(c) = F;
      }
    }
    out.setZero(f.rows(), f.cols());
    for (std::size_t n = 0; n < grid_.node_count(); ++n) {
      if (grid_.on_wall(n)) continue;
      const auto c = static_cast<Eigen::Index>(n);
      StateVec acc = StateVec::Zero(d + 1);
      for (int i = 0; i < d; ++i) {
        const double h = grid_.spacing(i);
        const auto up = static_cast<Eigen::Index>(grid_.step(n, i, +1));
        const auto dn = static_cast<Eigen::Index>(grid_.step(n, i, -1));
        acc += (0.5 / (h * h)) * (f.col(up) - 2.0 * f.col(c) + f.col(dn));
        acc -= (0.5 / h) * (flux_[i].col(up) - flux_[i].col(dn));
      }
      out.col(c) = acc;
    }
  }

 private:
  void set_lambda(std::size_t n, const StateVec& lam) {
    lambda_.col(static_cast<Eigen::Index>(n)) = lam;
    update_chi(n);
  }

  void update_chi(std::size_t n) {
    const auto c = static_cast<Eigen::Index>(n);
    thetas(lambda_.col(c), vs_, theta_);
    for (std::size_t v = 0; v < vs_.size(); ++v) chi_(static_cast<Eigen::Index>(v), c) = chi(theta_[v]);
  }

  void update_control(double t) {
    if (H_.empty()) return;
    for (int i = 0; i < grid_.dim(); ++i) gradH_[i].setZero();
    const auto& terms = H_.terms();
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const double ct = terms[j].coefficient * time_mode(terms[j].mode.time, t, H_.horizon());
      const int k = terms[j].mode.component;
      for (int i = 0; i < grid_.dim(); ++i)
        gradH_[i].row(k) += ct * table_.grad[i].col(static_cast<Eigen::Index>(j)).transpose();
    }
  }

  const Grid& grid_;
  const VelocitySet& vs_;
  Hull hull_;
  const Control& H_;
  const Matrix& left_;
  const Matrix& right_;
  SolverOptions opts_;
  Matrix lambda_;
  Matrix chi_;
  std::array<Matrix, kMaxDim> flux_;
  std::array<Matrix, kMaxDim> gradH_;
  SpaceTable table_;
  std::vector<double> theta_;
};

}  // namespace

MacroField MacroField::sample(const Grid& grid, const ConservedProfile& profile) {
  MacroField f{grid, Matrix(grid.dim() + 1, static_cast<Eigen::Index>(grid.node_count()))};
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const StateVec v = profile(grid.position(n));
    if (v.size() != grid.dim() + 1) throw ConfigError("profile has the wrong number of components");
    f.values.col(static_cast<Eigen::Index>(n)) = v;
  }
  return f;
}

BoundaryData BoundaryData::from_reservoirs(const ReservoirProfiles& reservoirs, const VelocitySet& vs) {
  BoundaryData bd;
  auto combine = [vs](const std::vector<Profile>& family) {
    return [vs, family](std::span<const double> u) {
      StateVec s = StateVec::Zero(vs.dim() + 1);
      for (std::size_t v = 0; v < vs.size(); ++v) s += family[v](u) * vs.lifted(v);
      return s;
    };
  };
  bd.a = combine(reservoirs.alpha);
  bd.b = combine(reservoirs.beta);
  return bd;
}

BoundaryData BoundaryData::constant(const StateVec& a, const StateVec& b) {
  return {[a](std::span<const double>) { return a; }, [b](std::span<const double>) { return b; }};
}

FieldTrajectory FieldTrajectory::sample(
    const Grid& grid, const VelocitySet& vs, const std::vector<double>& times,
    const std::function<StateVec(double, const std::array<double, kMaxDim>&)>& f) {
  if (times.empty()) throw ConfigError("trajectory: no frames");
  FieldTrajectory traj{grid, vs, {}, {}, times, {}};
  for (double t : times)
    traj.frames.push_back(MacroField::sample(grid, [&](const auto& u) { return f(t, u); }).values);
  const auto faces = static_cast<Eigen::Index>(grid.transverse_count());
  traj.left.resize(grid.dim() + 1, faces);
  traj.right.resize(grid.dim() + 1, faces);
  for (Eigen::Index t = 0; t < faces; ++t) {
    traj.left.col(t) = traj.frames[0].col(static_cast<Eigen::Index>(grid.node(0, static_cast<std::size_t>(t))));
    traj.right.col(t) =
        traj.frames[0].col(static_cast<Eigen::Index>(grid.node(grid.m1() - 1, static_cast<std::size_t>(t))));
  }
  return traj;
}

StateMat flux(const StateVec& value, const VelocitySet& vs) {
  const auto lam = lambda_of_rho_p({value}, vs);
  const int d = vs.dim();
  StateMat F = StateMat::Zero(d, d + 1);
  for (std::size_t v = 0; v < vs.size(); ++v) {
    const double c = chi(theta(lam, vs, v));
    for (int i = 0; i < d; ++i) F.row(i) += (c * vs.component(v, i)) * vs.lifted(v).transpose();
  }
  return F;
}

double max_stable_dt(const Grid& grid) {
  const double h = grid.min_spacing();
  return h * h / (2.0 * (grid.dim() + 1));
}

FieldTrajectory solve_hydro(const ConservedProfile& gamma, const BoundaryData& boundary,
                            const VelocitySet& vs, double T, const Grid& grid,
                            const SolverOptions& options) {
  return solve_controlled(gamma, boundary, vs, Control(vs.dim(), T > 0 ? T : 1.0), T, grid, options);
}

FieldTrajectory solve_controlled(const ConservedProfile& gamma, const BoundaryData& boundary,
                                 const VelocitySet& vs, const Control& H, double T,
                                 const Grid& grid, const SolverOptions& options) {
  if (grid.dim() != vs.dim()) throw ConfigError("hydro: grid and velocity set dimensions differ");
  if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("hydro: horizon must be finite and nonnegative");
  if (!(options.dt > 0.0)) throw ConfigError("hydro: dt must be positive");
  if (options.dt > max_stable_dt(grid) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "hydro: dt = " << options.dt << " exceeds the stability limit h^2/(2(d+1)) = "
       << max_stable_dt(grid);
    throw ConfigError(os.str());
  }
  if (!H.empty() && H.dim() != vs.dim()) throw ConfigError("hydro: control dimension differs");

  const Hull hull(vs);
  FieldTrajectory traj{grid, vs, face_values(grid, boundary.a), face_values(grid, boundary.b), {}, {}};
  for (const auto* side : {&traj.left, &traj.right})
    for (Eigen::Index t = 0; t < side->cols(); ++t)
      if (!(hull.margin(side->col(t)) > Hull::kInteriorTolerance))
        throw ConfigError("hydro: boundary data must lie strictly inside the hull");

  Matrix f = MacroField::sample(grid, gamma).values;
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    if (grid.on_wall(n)) continue;
    if (hull.margin(f.col(static_cast<Eigen::Index>(n))) < -options.projection_tolerance)
      throw ConfigError("hydro: initial profile leaves the hull at " + where(grid, n, 0.0));
  }
  traj.times.push_back(0.0);
  traj.frames.push_back(f);
  if (T == 0.0) return traj;

  // Frames land on T*k/K; each frame gap is an equal number of steps no
  // longer than options.dt.
  std::size_t steps = static_cast<std::size_t>(std::ceil(T / options.dt - 1e-9));
  std::size_t stride = 1;
  if (options.frame_interval > 0.0) {
    const auto K = std::max<std::size_t>(
        1, std::min(steps, static_cast<std::size_t>(std::llround(T / options.frame_interval))));
    stride = (steps + K - 1) / K;
    steps = K * stride;
  }
  const double dt = T / static_cast<double>(steps);

  Stepper stepper(grid, vs, H, traj.left, traj.right, options);
  stepper.impose_walls(f);
  stepper.enforce_hull(f, 0.0);
  Matrix k1, k2, f1;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    const double t1 = static_cast<double>(s + 1) * dt;
    stepper.rhs(f, t, k1);
    f1 = f + dt * k1;
    stepper.impose_walls(f1);
    stepper.enforce_hull(f1, t1);
    stepper.rhs(f1, t1, k2);
    f = 0.5 * (f + f1 + dt * k2);
    stepper.impose_walls(f);
    stepper.enforce_hull(f, t1);
    if ((s + 1) % stride == 0) {
      traj.times.push_back(s + 1 == steps ? T : t1);
      traj.frames.push_back(f);
    }
  }
  return traj;
}

// ---------------------------------------------------------------- quadrature

TrajectoryQuadrature::TrajectoryQuadrature(const FieldTrajectory& tr) : traj(&tr) {
  const Grid& grid = tr.grid;
  const auto& vs = tr.velocities;
  const auto nodes = static_cast<Eigen::Index>(grid.node_count());
  weights.resize(nodes);
  for (Eigen::Index n = 0; n < nodes; ++n) weights[n] = grid.weight(static_cast<std::size_t>(n));
  const Hull hull(vs);
  Matrix lambda = Matrix::Zero(grid.dim() + 1, nodes);
  std::vector<double> th(vs.size());
  for (std::size_t i = 0; i + 1 < tr.frames.size(); ++i) {
    dt.push_back(tr.times[i + 1] - tr.times[i]);
    t_mid.push_back(0.5 * (tr.times[i] + tr.times[i + 1]));
    Matrix m = 0.5 * (tr.frames[i] + tr.frames[i + 1]);
    Matrix c(static_cast<Eigen::Index>(vs.size()), nodes);
    for (Eigen::Index n = 0; n < nodes; ++n) {
      const StateVec x = m.col(n);
      if (!(hull.margin(x) > 0.0)) {
        std::ostringstream os;
        os << "trajectory leaves the hull at interval " << i << ", "
           << where(grid, static_cast<std::size_t>(n), t_mid.back());
        throw DomainError(os.str());
      }
      lambda.col(n) = i == 0 ? lambda_of_rho_p({x}, vs).values
                             : solve_lambda(x, vs, lambda.col(n)).values;
      thetas(lambda.col(n), vs, th);
      for (std::size_t v = 0; v < vs.size(); ++v) c(static_cast<Eigen::Index>(v), n) = bdex::chi(th[v]);
    }
    mid.push_back(std::move(m));
    chi.push_back(std::move(c));
  }
}

double linear_part(const TrajectoryQuadrature& q, const TestFunction& G, const Eigen::MatrixXd* gamma) {
  const FieldTrajectory& tr = *q.traj;
  const Grid& grid = tr.grid;
  const auto& vs = tr.velocities;
  const int d = grid.dim();
  const Matrix& g0 = gamma ? *gamma : tr.frames.front();
  const double T = tr.horizon();
  double endpoint = 0.0;
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const auto c = static_cast<Eigen::Index>(n);
    const auto u = grid.position(n);
    endpoint += q.weights[c] * (G.evaluate(T, u).value.dot(tr.frames.back().col(c)) -
                                G.evaluate(0.0, u).value.dot(g0.col(c)));
  }
  double bulk = 0.0, wall = 0.0, drift = 0.0;
  for (std::size_t i = 0; i < q.intervals(); ++i) {
    double b_i = 0.0, w_i = 0.0, f_i = 0.0;
    for (std::size_t n = 0; n < grid.node_count(); ++n) {
      const auto c = static_cast<Eigen::Index>(n);
      const auto P = G.evaluate(q.t_mid[i], grid.position(n));
      const StateVec lam = q.mid[i].col(c);
      b_i += q.weights[c] * lam.dot(P.dt + 0.5 * P.laplacian);
      double fl = 0.0;
      for (std::size_t v = 0; v < vs.size(); ++v) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += vs.component(v, j) * vs.lifted(v).dot(P.grad[j]);
        fl += q.chi[i](static_cast<Eigen::Index>(v), c) * s;
      }
      f_i += q.weights[c] * fl;
      if (grid.on_wall(n)) {
        const auto t = static_cast<Eigen::Index>(grid.transverse(n));
        if (grid.i1(n) == 0)
          w_i -= grid.face_weight() * tr.left.col(t).dot(P.grad[0]);
        else
          w_i += grid.face_weight() * tr.right.col(t).dot(P.grad[0]);
      }
    }
    bulk += q.dt[i] * b_i;
    wall += q.dt[i] * w_i;
    drift += q.dt[i] * f_i;
  }
  return endpoint - bulk + 0.5 * wall - drift;
}

double pi_inner(const TrajectoryQuadrature& q, const TestFunction& G, const TestFunction& H) {
  const FieldTrajectory& tr = *q.traj;
  const Grid& grid = tr.grid;
  const auto& vs = tr.velocities;
  const int d = grid.dim();
  double total = 0.0;
  for (std::size_t i = 0; i < q.intervals(); ++i) {
    double acc = 0.0;
    for (std::size_t n = 0; n < grid.node_count(); ++n) {
      const auto c = static_cast<Eigen::Index>(n);
      const auto u = grid.position(n);
      const auto PG = G.evaluate(q.t_mid[i], u);
      const auto PH = &G == &H ? PG : H.evaluate(q.t_mid[i], u);
      double s = 0.0;
      for (std::size_t v = 0; v < vs.size(); ++v) {
        double dot = 0.0;
        for (int j = 0; j < d; ++j) dot += vs.lifted(v).dot(PG.grad[j]) * vs.lifted(v).dot(PH.grad[j]);
        s += q.chi[i](static_cast<Eigen::Index>(v), c) * dot;
      }
      acc += q.weights[c] * s;
    }
    total += q.dt[i] * acc;
  }
  return total;
}

double weak_residual(const FieldTrajectory& traj, const TestFunction& G) {
  return linear_part(TrajectoryQuadrature(traj), G);
}

double field_energy(const FieldTrajectory& traj) {
  const Grid& grid = traj.grid;
  const int d = grid.dim();
  const int m1 = grid.m1();
  auto frame_energy = [&](const Matrix& f) {
    double e = 0.0;
    for (std::size_t n = 0; n < grid.node_count(); ++n) {
      const auto c = static_cast<Eigen::Index>(n);
      double g2 = 0.0;
      for (int i = 0; i < d; ++i) {
        StateVec g;
        const double h = grid.spacing(i);
        if (i == 0 && grid.i1(n) == 0) {
          g = (-3.0 * f.col(c) + 4.0 * f.col(c + 1) - f.col(c + 2)) / (2.0 * h);
        } else if (i == 0 && grid.i1(n) == m1 - 1) {
          g = (3.0 * f.col(c) - 4.0 * f.col(c - 1) + f.col(c - 2)) / (2.0 * h);
        } else {
          g = (f.col(static_cast<Eigen::Index>(grid.step(n, i, +1))) -
               f.col(static_cast<Eigen::Index>(grid.step(n, i, -1)))) / (2.0 * h);
        }
        g2 += g.squaredNorm();
      }
      e += grid.weight(n) * g2;
    }
    return e;
  };
  double total = 0.0;
  double prev = frame_energy(traj.frames.front());
  for (std::size_t i = 1; i < traj.frames.size(); ++i) {
    const double cur = frame_energy(traj.frames[i]);
    total += 0.5 * (traj.times[i] - traj.times[i - 1]) * (prev + cur);
    prev = cur;
  }
  return total;
}

// ---------------------------------------------------------------- I/O

namespace {

template <class T>
void put(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw StructuralError("trajectory file truncated");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) put<double>(out, m(r, c));
}

Matrix get_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = get<double>(in);
  return m;
}

}  // namespace

void write_binary(std::ostream& out, const FieldTrajectory& traj) {
  static_assert(std::endian::native == std::endian::little, "binary format assumes little-endian host");
  out.write("BDXT", 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(traj.grid.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(traj.grid.m1()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(traj.grid.m()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(traj.velocities.size()));
  for (std::size_t v = 0; v < traj.velocities.size(); ++v)
    for (double x : traj.velocities.velocity(v)) put<double>(out, x);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(traj.grid.transverse_count()));
  put_matrix(out, traj.left);
  put_matrix(out, traj.right);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(traj.frames.size()));
  for (std::size_t i = 0; i < traj.frames.size(); ++i) {
    put<double>(out, traj.times[i]);
    put_matrix(out, traj.frames[i]);
  }
}

FieldTrajectory read_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "BDXT", 4) != 0)
    throw StructuralError("not a trajectory file");
  if (get<std::uint32_t>(in) != 1) throw StructuralError("unsupported trajectory version");
  const int d = static_cast<int>(get<std::uint32_t>(in));
  const int m1 = static_cast<int>(get<std::uint32_t>(in));
  const int m = static_cast<int>(get<std::uint32_t>(in));
  Grid grid(d, m1, m);
  const auto nv = get<std::uint32_t>(in);
  std::vector<std::vector<double>> vel(nv, std::vector<double>(static_cast<std::size_t>(d)));
  for (auto& v : vel)
    for (auto& x : v) x = get<double>(in);
  FieldTrajectory traj{grid, VelocitySet::create(d, vel), {}, {}, {}, {}};
  const auto faces = static_cast<Eigen::Index>(get<std::uint32_t>(in));
  if (faces != static_cast<Eigen::Index>(grid.transverse_count()))
    throw StructuralError("trajectory face count mismatch");
  traj.left = get_matrix(in, d + 1, faces);
  traj.right = get_matrix(in, d + 1, faces);
  const auto frames = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < frames; ++i) {
    traj.times.push_back(get<double>(in));
    traj.frames.push_back(get_matrix(in, d + 1, static_cast<Eigen::Index>(grid.node_count())));
  }
  if (traj.frames.empty()) throw StructuralError("trajectory has no frames");
  return traj;
}

void write_csv(std::ostream& out, const FieldTrajectory& traj, const std::string& preamble) {
  out << preamble;
  const int d = traj.grid.dim();
  out << "t";
  for (int j = 0; j < d; ++j) out << ",u" << j + 1;
  out << ",rho";
  for (int k = 1; k <= d; ++k) out << ",p" << k;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < traj.frames.size(); ++i)
    for (std::size_t n = 0; n < traj.grid.node_count(); ++n) {
      out << traj.times[i];
      const auto u = traj.grid.position(n);
      for (int j = 0; j < d; ++j) out << ',' << u[j];
      for (int k = 0; k <= d; ++k) out << ',' << traj.frames[i](k, static_cast<Eigen::Index>(n));
      out << '\n';
    }
}

}  // namespace bdex
