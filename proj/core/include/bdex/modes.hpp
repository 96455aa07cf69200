#pragma once

#include <array>
#include <vector>

#include "bdex/grid.hpp"

namespace bdex {

/// Time factor of a separable mode on [0, T]:
/// a = 0 → 1, a = 1 → t/T, a ≥ 2 → sin((a-1)πt/T).
double time_mode(int a, double t, double T);
double time_mode_dt(int a, double t, double T);

/// Space factor sin(m π u₁) · f_{n₂}(u₂) · f_{n₃}(u₃) with f_0 = 1,
/// f_n = cos(2πn u) and f_{-n} = sin(2πn u) for n > 0. Vanishes at u₁ ∈ {0,1}.
struct SpaceMode {
  int m = 1;
  std::array<int, 2> n{};
  bool operator==(const SpaceMode&) const = default;
};

struct SpaceValue {
  double value = 0.0;
  std::array<double, kMaxDim> grad{};
  double laplacian = 0.0;
};

SpaceValue eval_space(const SpaceMode& s, const std::array<double, kMaxDim>& u, int dim);

/// e_k · T_a(t) · S(u): one basis function of the (d+1)-vector test space.
struct Mode {
  int component = 0;
  int time = 0;
  SpaceMode space;
  bool operator==(const Mode&) const = default;
};

/// Values of a vector test function and its derivatives at one point.
struct TestPoint {
  StateVec value;
  StateVec dt;
  StateVec laplacian;
  /// grad[i] = ∂_{u_i} G, a (d+1)-vector.
  std::array<StateVec, kMaxDim> grad;
};

/// Finite linear combination of modes; vanishes on Γ = {0,1} × 𝕋^{d-1}
/// by construction and has analytic derivatives.
class TestFunction {
 public:
  struct Term {
    Mode mode;
    double coefficient;
  };

  TestFunction(int dim, double horizon) : dim_(dim), horizon_(horizon) {}

  TestFunction& add(const Mode& mode, double coefficient);
  TestFunction scaled(double c) const;

  int dim() const { return dim_; }
  double horizon() const { return horizon_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  TestPoint evaluate(double t, const std::array<double, kMaxDim>& u) const;

 private:
  int dim_;
  double horizon_;
  std::vector<Term> terms_;
};

/// A control H is a test function; the controlled equation only needs its
/// spatial gradient.
using Control = TestFunction;

/// Space factors of `modes` tabulated on every node of `grid`.
struct SpaceTable {
  /// value(node, j), lap(node, j), grad[i](node, j)
  Eigen::MatrixXd value;
  Eigen::MatrixXd laplacian;
  std::array<Eigen::MatrixXd, kMaxDim> grad;
  /// ∂₁S at the faces u₁ = 0 and u₁ = 1: (face node, j)
  Eigen::MatrixXd d1_left;
  Eigen::MatrixXd d1_right;
};

SpaceTable tabulate(const std::vector<SpaceMode>& modes, const Grid& grid);

}  // namespace bdex
