#include "bdex/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bdex/errors.hpp"

namespace bdex {

namespace {

constexpr double kTie = 1e-9;

// Integer sites k with |k/N - c| ≤ eps, as an inclusive range.
std::pair<long, long> site_range(double c, double eps, int N) {
  const long lo = static_cast<long>(std::ceil(N * (c - eps) - kTie));
  const long hi = static_cast<long>(std::floor(N * (c + eps) + kTie));
  return {lo, hi};
}

// Transverse residues mod N inside the periodic box of half-width eps.
std::vector<int> torus_sites(double c, double eps, int N) {
  std::vector<int> out;
  if (2.0 * eps >= 1.0) {
    for (int k = 0; k < N; ++k) out.push_back(k);
    return out;
  }
  const auto [lo, hi] = site_range(c, eps, N);
  for (long k = lo; k <= hi; ++k) out.push_back(static_cast<int>(((k % N) + N) % N));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ∫_a^b of the piecewise-linear interpolant on nodes i·h, i = 0..n-1,
// returned as weights per node. Non-periodic: [a,b] ⊂ [0, (n-1)h].
void hat_weights(double a, double b, double h, int n, bool periodic, std::vector<double>& w) {
  w.assign(static_cast<std::size_t>(n), 0.0);
  if (periodic && b - a >= 1.0) {
    std::fill(w.begin(), w.end(), 1.0 / n);
    return;
  }
  const auto add_piece = [&](double s, double e) {
    // s, e in absolute coordinates; cells indexed by floor(x/h).
    long first = static_cast<long>(std::floor(s / h));
    long last = static_cast<long>(std::ceil(e / h)) - 1;
    for (long c = first; c <= last; ++c) {
      const double x0 = c * h;
      const double cs = std::max(s, x0), ce = std::min(e, x0 + h);
      if (ce <= cs) continue;
      const double sig = (cs - x0) / h, tau = (ce - x0) / h;
      const double right = 0.5 * h * (tau * tau - sig * sig);
      const double left = h * (tau - sig) - right;
      auto idx = [&](long k) {
        return static_cast<std::size_t>(periodic ? ((k % n) + n) % n : std::clamp<long>(k, 0, n - 1));
      };
      w[idx(c)] += left;
      w[idx(c + 1)] += right;
    }
  };
  add_piece(a, b);
}

}  // namespace

std::array<double, kMaxDim> EmpiricalMeasure::position(std::size_t x) const {
  std::array<double, kMaxDim> u{};
  const std::size_t len = static_cast<std::size_t>(scale - 1);
  u[0] = static_cast<double>(x % len + 1) / scale;
  std::size_t rest = x / len;
  for (int j = 1; j < dim; ++j) {
    u[j] = static_cast<double>(rest % static_cast<std::size_t>(scale)) / scale;
    rest /= static_cast<std::size_t>(scale);
  }
  return u;
}

EmpiricalMeasure empirical_measure(const Configuration& eta, const Lattice& lattice,
                                   const VelocitySet& vs) {
  if (eta.site_count() != lattice.site_count() || eta.velocity_count() != vs.size() ||
      lattice.dim() != vs.dim())
    throw StructuralError("empirical_measure: shapes disagree");
  EmpiricalMeasure m;
  m.scale = lattice.scale();
  m.dim = lattice.dim();
  m.wall = lattice.wall();
  const double atom = std::pow(static_cast<double>(lattice.scale()), -lattice.dim());
  m.masses.resize(static_cast<Eigen::Index>(lattice.site_count()), lattice.dim() + 1);
  for (Site x = 0; x < lattice.site_count(); ++x) {
    const auto I = conserved_of_state(eta.local(x), vs);
    m.masses.row(static_cast<Eigen::Index>(x)) = atom * I.values.transpose();
  }
  return m;
}

double pair(const EmpiricalMeasure& measure, int k, const ScalarFunction& G) {
  double s = 0.0;
  for (std::size_t x = 0; x < measure.atoms(); ++x) {
    const double mass = measure.masses(static_cast<Eigen::Index>(x), k);
    if (mass != 0.0) s += mass * G(measure.position(x));
  }
  return s;
}

StateVec pair(const EmpiricalMeasure& measure, const ScalarFunction& G) {
  StateVec out = StateVec::Zero(measure.components());
  for (std::size_t x = 0; x < measure.atoms(); ++x) {
    const auto row = measure.masses.row(static_cast<Eigen::Index>(x));
    if (row.isZero(0.0)) continue;
    out += G(measure.position(x)) * row.transpose();
  }
  return out;
}

ConservedVector block_average(const Configuration& eta, const Lattice& lattice,
                              const VelocitySet& vs, Site x, int L) {
  if (L < 0) throw DomainError("block_average: L must be nonnegative");
  if (!lattice.valid(x)) throw DomainError("block_average: site out of range");
  const int d = lattice.dim();
  const int N = lattice.scale();
  const Coords c = lattice.coords(x);
  if (lattice.wall() == Wall::Reservoir && (c[0] - L < 1 || c[0] + L > N - 1))
    throw DomainError("block_average: block crosses the x1 wall");
  if (2 * L + 1 > N - 1 || (d > 1 && 2 * L + 1 > N))
    throw DomainError("block_average: block wraps onto itself");
  StateVec sum = StateVec::Zero(d + 1);
  std::size_t count = 0;
  Coords off{};
  const int side = 2 * L + 1;
  std::size_t cells = 1;
  for (int j = 0; j < d; ++j) cells *= static_cast<std::size_t>(side);
  for (std::size_t b = 0; b < cells; ++b) {
    std::size_t rest = b;
    for (int j = 0; j < d; ++j) {
      off[j] = static_cast<int>(rest % side) - L;
      rest /= side;
    }
    Coords z = c;
    z[0] += off[0];
    if (lattice.wall() == Wall::Periodic) z[0] = ((z[0] - 1) % (N - 1) + (N - 1)) % (N - 1) + 1;
    for (int j = 1; j < d; ++j) z[j] = ((c[j] + off[j]) % N + N) % N;
    sum += conserved_of_state(eta.local(lattice.site(z)), vs).values;
    ++count;
  }
  return {sum / static_cast<double>(count)};
}

SmoothedField smooth(const EmpiricalMeasure& measure, double eps, const Grid& grid) {
  if (!(eps > 0.0)) throw ConfigError("smooth: eps must be positive");
  if (grid.dim() != measure.dim) throw ConfigError("smooth: grid dimension differs from measure");
  for (int j = 0; j < grid.dim(); ++j)
    if (grid.spacing(j) > 0.5 * eps + 1e-15) throw ConfigError("smooth: grid spacing exceeds eps/2");
  const int d = measure.dim;
  const int N = measure.scale;
  const int nc = d + 1;
  const auto len = static_cast<std::size_t>(N - 1);
  SmoothedField out{grid, eps, inflation_constant(eps), Eigen::MatrixXd::Zero(nc, grid.node_count())};
  const double trans_vol = std::min(2.0 * eps, 1.0);

  std::vector<std::vector<int>> tsites(2);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto u = grid.position(node);
    auto [lo, hi] = site_range(u[0], eps, N);
    lo = std::max(lo, 1L);
    hi = std::min(hi, static_cast<long>(N - 1));
    const double vol1 = std::min(1.0, u[0] + eps) - std::max(0.0, u[0] - eps);
    double vol = vol1;
    for (int j = 1; j < d; ++j) {
      tsites[j - 1] = torus_sites(u[j], eps, N);
      vol *= trans_vol;
    }
    StateVec mass = StateVec::Zero(nc);
    const std::size_t n2 = d > 1 ? tsites[0].size() : 1;
    const std::size_t n3 = d > 2 ? tsites[1].size() : 1;
    for (std::size_t a = 0; a < n3; ++a)
      for (std::size_t b = 0; b < n2; ++b) {
        std::size_t base = 0;
        if (d > 1) base += static_cast<std::size_t>(tsites[0][b]) * len;
        if (d > 2) base += static_cast<std::size_t>(tsites[1][a]) * len * static_cast<std::size_t>(N);
        for (long x1 = lo; x1 <= hi; ++x1)
          mass += measure.masses.row(static_cast<Eigen::Index>(base + static_cast<std::size_t>(x1 - 1)))
                      .transpose();
      }
    out.values.col(static_cast<Eigen::Index>(node)) = mass / (vol * out.inflation);
  }
  return out;
}

SmoothedField smooth_field(const Eigen::MatrixXd& values, const Grid& grid, double eps) {
  if (!(eps > 0.0)) throw ConfigError("smooth_field: eps must be positive");
  if (values.cols() != static_cast<Eigen::Index>(grid.node_count()) || values.rows() != grid.dim() + 1)
    throw StructuralError("smooth_field: value shape does not match grid");
  const int d = grid.dim();
  const int nc = d + 1;
  SmoothedField out{grid, eps, inflation_constant(eps), Eigen::MatrixXd::Zero(nc, grid.node_count())};
  std::vector<double> w1;
  std::array<std::vector<double>, 2> wt;
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto u = grid.position(node);
    const double a = std::max(0.0, u[0] - eps), b = std::min(1.0, u[0] + eps);
    hat_weights(a, b, grid.h1(), grid.m1(), false, w1);
    double vol = b - a;
    for (int j = 1; j < d; ++j) {
      hat_weights(u[j] - eps, u[j] + eps, grid.ht(), grid.m(), true, wt[j - 1]);
      vol *= std::min(2.0 * eps, 1.0);
    }
    StateVec acc = StateVec::Zero(nc);
    const std::size_t m = static_cast<std::size_t>(grid.m());
    const std::size_t n2 = d > 1 ? m : 1, n3 = d > 2 ? m : 1;
    for (std::size_t c = 0; c < n3; ++c)
      for (std::size_t r = 0; r < n2; ++r) {
        double wtr = 1.0;
        if (d > 1) wtr *= wt[0][r];
        if (d > 2) wtr *= wt[1][c];
        if (wtr == 0.0) continue;
        const std::size_t t = r + m * c;
        for (int i = 0; i < grid.m1(); ++i) {
          const double wi = w1[static_cast<std::size_t>(i)];
          if (wi == 0.0) continue;
          acc += (wi * wtr) * values.col(static_cast<Eigen::Index>(grid.node(i, t)));
        }
      }
    out.values.col(static_cast<Eigen::Index>(node)) = acc / (vol * out.inflation);
  }
  return out;
}

StateVec l1_distance(const SmoothedField& f, const SmoothedField& g) {
  if (!(f.grid == g.grid) || f.values.rows() != g.values.rows())
    throw StructuralError("l1_distance: fields live on different grids");
  StateVec out = StateVec::Zero(f.values.rows());
  for (std::size_t n = 0; n < f.grid.node_count(); ++n) {
    const auto c = static_cast<Eigen::Index>(n);
    out += f.grid.weight(n) * (f.values.col(c) - g.values.col(c)).cwiseAbs();
  }
  return out;
}

void write_csv(std::ostream& out, const SmoothedField& field, const std::string& preamble) {
  out << preamble;
  const int d = field.grid.dim();
  for (int j = 0; j < d; ++j) out << (j ? "," : "") << "u" << j + 1;
  for (int k = 0; k <= d; ++k) out << ",pi" << k;
  out << '\n';
  out.precision(17);
  for (std::size_t n = 0; n < field.grid.node_count(); ++n) {
    const auto u = field.grid.position(n);
    for (int j = 0; j < d; ++j) out << (j ? "," : "") << u[j];
    for (int k = 0; k <= d; ++k) out << ',' << field.values(k, static_cast<Eigen::Index>(n));
    out << '\n';
  }
}

}  // namespace bdex
