#pragma once

#include <array>
#include <cstddef>

#include "bdex/velocity_set.hpp"

namespace bdex {

/// Uniform grid on D̄^d = [0,1] × 𝕋^{d-1}.
///
/// `m1` nodes along u₁ including both endpoints, `m` nodes per transverse
/// direction (periodic, no duplicated endpoint). Nodes are numbered with u₁
/// fastest: node = i₁ + m1·(i₂ + m·i₃).
class Grid {
 public:
  Grid(int dim, int m1, int m = 1);

  int dim() const { return dim_; }
  int m1() const { return m1_; }
  int m() const { return m_; }
  std::size_t node_count() const { return static_cast<std::size_t>(m1_) * transverse_count_; }
  /// m^{d-1}: number of nodes on each face u₁ = const.
  std::size_t transverse_count() const { return transverse_count_; }

  double h1() const { return 1.0 / (m1_ - 1); }
  double ht() const { return 1.0 / m_; }
  /// Spacing along direction j (0-based).
  double spacing(int j) const { return j == 0 ? h1() : ht(); }
  double min_spacing() const;

  std::size_t node(int i1, std::size_t transverse) const {
    return static_cast<std::size_t>(i1) + static_cast<std::size_t>(m1_) * transverse;
  }
  int i1(std::size_t node) const { return static_cast<int>(node % static_cast<std::size_t>(m1_)); }
  std::size_t transverse(std::size_t node) const { return node / static_cast<std::size_t>(m1_); }
  bool on_wall(std::size_t node) const {
    const int i = i1(node);
    return i == 0 || i == m1_ - 1;
  }

  std::array<double, kMaxDim> position(std::size_t node) const;
  /// Transverse coordinates (u₂, u₃) of a face index; unused entries are 0.
  std::array<double, kMaxDim - 1> transverse_position(std::size_t t) const;

  /// Neighbor of `node` one step along direction j (sign ±1); transverse
  /// directions wrap. Undefined for u₁ steps off the wall.
  std::size_t step(std::size_t node, int j, int sign) const;

  /// Trapezoid weight in u₁ times the periodic weight 1/m per transverse
  /// direction; the weights sum to 1.
  double weight(std::size_t node) const;
  /// Weight of a face node in ∫_{𝕋^{d-1}} dS; sums to 1 over a face.
  double face_weight() const { return 1.0 / static_cast<double>(transverse_count_); }

  bool operator==(const Grid&) const = default;

 private:
  int dim_;
  int m1_;
  int m_;
  std::size_t transverse_count_;
};

}  // namespace bdex
