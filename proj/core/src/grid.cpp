#include "bdex/grid.hpp"

#include <algorithm>

#include "bdex/errors.hpp"

namespace bdex {

Grid::Grid(int dim, int m1, int m) : dim_(dim), m1_(m1), m_(dim == 1 ? 1 : m) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("grid: dimension must be 1, 2 or 3");
  if (m1 < 3) throw ConfigError("grid: need at least 3 nodes along u1");
  if (dim > 1 && m < 3) throw ConfigError("grid: need at least 3 transverse nodes");
  transverse_count_ = 1;
  for (int j = 1; j < dim_; ++j) transverse_count_ *= static_cast<std::size_t>(m_);
}

double Grid::min_spacing() const { return dim_ == 1 ? h1() : std::min(h1(), ht()); }

std::array<double, kMaxDim> Grid::position(std::size_t n) const {
  std::array<double, kMaxDim> u{};
  u[0] = i1(n) * h1();
  const auto tp = transverse_position(transverse(n));
  for (int j = 1; j < dim_; ++j) u[j] = tp[j - 1];
  return u;
}

std::array<double, kMaxDim - 1> Grid::transverse_position(std::size_t t) const {
  std::array<double, kMaxDim - 1> u{};
  for (int j = 1; j < dim_; ++j) {
    u[j - 1] = static_cast<double>(t % static_cast<std::size_t>(m_)) * ht();
    t /= static_cast<std::size_t>(m_);
  }
  return u;
}

std::size_t Grid::step(std::size_t n, int j, int sign) const {
  if (j == 0) return sign > 0 ? n + 1 : n - 1;
  std::size_t t = transverse(n);
  std::size_t stride = 1;
  for (int k = 1; k < j; ++k) stride *= static_cast<std::size_t>(m_);
  const auto m = static_cast<std::size_t>(m_);
  const std::size_t digit = (t / stride) % m;
  const std::size_t moved = sign > 0 ? (digit + 1) % m : (digit + m - 1) % m;
  t = t - digit * stride + moved * stride;
  return node(i1(n), t);
}

double Grid::weight(std::size_t n) const {
  const double w1 = on_wall(n) ? 0.5 * h1() : h1();
  return w1 * face_weight();
}

}  // namespace bdex
