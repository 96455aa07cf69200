#include "bdex/modes.hpp"

#include <cmath>
#include <numbers>

#include "bdex/errors.hpp"

namespace bdex {

namespace {

constexpr double kPi = std::numbers::pi;

struct Factor {
  double f, df, d2f;
};

Factor transverse_factor(int n, double u) {
  if (n == 0) return {1.0, 0.0, 0.0};
  const double w = 2.0 * kPi * std::abs(n);
  const double c = std::cos(w * u), s = std::sin(w * u);
  if (n > 0) return {c, -w * s, -w * w * c};
  return {s, w * c, -w * w * s};
}

}  // namespace

double time_mode(int a, double t, double T) {
  if (a == 0) return 1.0;
  if (a == 1) return t / T;
  return std::sin((a - 1) * kPi * t / T);
}

double time_mode_dt(int a, double t, double T) {
  if (a == 0) return 0.0;
  if (a == 1) return 1.0 / T;
  const double w = (a - 1) * kPi / T;
  return w * std::cos(w * t);
}

SpaceValue eval_space(const SpaceMode& s, const std::array<double, kMaxDim>& u, int dim) {
  const double w = s.m * kPi;
  std::array<Factor, kMaxDim> f{};
  // Exactly zero on the walls; sin(mπ) itself rounds to O(1e-16).
  const double s1 = (u[0] == 0.0 || u[0] == 1.0) ? 0.0 : std::sin(w * u[0]);
  f[0] = {s1, w * std::cos(w * u[0]), -w * w * s1};
  for (int j = 1; j < dim; ++j) f[j] = transverse_factor(s.n[j - 1], u[j]);
  SpaceValue out;
  out.value = 1.0;
  for (int j = 0; j < dim; ++j) out.value *= f[j].f;
  for (int i = 0; i < dim; ++i) {
    double g = 1.0, l = 1.0;
    for (int j = 0; j < dim; ++j) {
      g *= j == i ? f[j].df : f[j].f;
      l *= j == i ? f[j].d2f : f[j].f;
    }
    out.grad[i] = g;
    out.laplacian += l;
  }
  return out;
}

TestFunction& TestFunction::add(const Mode& mode, double coefficient) {
  if (mode.component < 0 || mode.component > dim_) throw ConfigError("test function: bad component");
  if (mode.time < 0 || mode.space.m < 1) throw ConfigError("test function: bad mode index");
  terms_.push_back({mode, coefficient});
  return *this;
}

TestFunction TestFunction::scaled(double c) const {
  TestFunction out(dim_, horizon_);
  for (const auto& t : terms_) out.terms_.push_back({t.mode, c * t.coefficient});
  return out;
}

TestPoint TestFunction::evaluate(double t, const std::array<double, kMaxDim>& u) const {
  const int nc = dim_ + 1;
  TestPoint p;
  p.value = StateVec::Zero(nc);
  p.dt = StateVec::Zero(nc);
  p.laplacian = StateVec::Zero(nc);
  for (int i = 0; i < kMaxDim; ++i) p.grad[i] = StateVec::Zero(nc);
  for (const auto& term : terms_) {
    const auto s = eval_space(term.mode.space, u, dim_);
    const double ta = time_mode(term.mode.time, t, horizon_);
    const double c = term.coefficient;
    const int k = term.mode.component;
    p.value[k] += c * ta * s.value;
    p.dt[k] += c * time_mode_dt(term.mode.time, t, horizon_) * s.value;
    p.laplacian[k] += c * ta * s.laplacian;
    for (int i = 0; i < dim_; ++i) p.grad[i][k] += c * ta * s.grad[i];
  }
  return p;
}

SpaceTable tabulate(const std::vector<SpaceMode>& modes, const Grid& grid) {
  const auto nodes = static_cast<Eigen::Index>(grid.node_count());
  const auto nm = static_cast<Eigen::Index>(modes.size());
  const auto faces = static_cast<Eigen::Index>(grid.transverse_count());
  SpaceTable tab;
  tab.value.resize(nodes, nm);
  tab.laplacian.resize(nodes, nm);
  for (int i = 0; i < kMaxDim; ++i) tab.grad[i] = Eigen::MatrixXd::Zero(nodes, nm);
  tab.d1_left.resize(faces, nm);
  tab.d1_right.resize(faces, nm);
  for (Eigen::Index j = 0; j < nm; ++j) {
    for (Eigen::Index n = 0; n < nodes; ++n) {
      const auto s = eval_space(modes[j], grid.position(static_cast<std::size_t>(n)), grid.dim());
      tab.value(n, j) = s.value;
      tab.laplacian(n, j) = s.laplacian;
      for (int i = 0; i < grid.dim(); ++i) tab.grad[i](n, j) = s.grad[i];
    }
    for (Eigen::Index f = 0; f < faces; ++f) {
      tab.d1_left(f, j) = tab.grad[0](static_cast<Eigen::Index>(grid.node(0, f)), j);
      tab.d1_right(f, j) = tab.grad[0](static_cast<Eigen::Index>(grid.node(grid.m1() - 1, f)), j);
    }
  }
  return tab;
}

}  // namespace bdex
