#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace bdex {

/// Largest spatial dimension supported; (ρ, p) vectors fit in 4 doubles.
inline constexpr int kMaxDim = 3;
/// Largest velocity set; a site state is a bitmask of this many bits.
inline constexpr std::size_t kMaxVelocities = 16;

/// (ρ, p₁, …, p_d) or (λ₀, …, λ_d): fixed-capacity, no heap allocation.
using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim + 1, 1>;
using StateMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim + 1, kMaxDim + 1>;

/// Finite velocity set, closed under coordinate reflections and permutations.
class VelocitySet {
 public:
  /// Validates symmetry, uniqueness and that the lifted vectors (1, v) span
  /// ℝ^{d+1}. Throws ConfigError on violation.
  static VelocitySet create(int dim, std::vector<std::vector<double>> velocities);

  /// One velocity per line, `dim` whitespace-separated decimals; `#` starts
  /// a comment. The dimension is inferred from the first data line.
  static VelocitySet parse(std::istream& in);
  static VelocitySet load(const std::string& path);

  /// d=1, {+v, -v}.
  static VelocitySet symmetric_pair(double v);

  int dim() const { return dim_; }
  std::size_t size() const { return count_; }

  /// Coordinates of velocity `i` (d entries).
  std::span<const double> velocity(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  double component(std::size_t i, int j) const { return coords_[i * dim_ + j]; }

  /// Lifted vector ṽ = (1, v₁, …, v_d): one particle's (mass, momentum).
  const StateVec& lifted(std::size_t i) const { return lifted_[i]; }

  /// max over v of v₁.
  double breve_v() const { return breve_v_; }
  /// max over v of Σ_j |v_j|.
  double max_l1() const;

  std::optional<std::size_t> index_of(std::span<const double> v, double tol = 1e-12) const;

  /// Same set with every velocity multiplied by `factor` (> 0).
  VelocitySet scaled(double factor) const;

  void write(std::ostream& out) const;

 private:
  int dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> coords_;
  std::vector<StateVec> lifted_;
  double breve_v_ = 0.0;
};

/// Momentum-conserving binary collision (v, w) -> (v', w'), by velocity index.
struct Collision {
  std::uint8_t v, w, v_out, w_out;

  std::uint32_t in_mask() const { return (1u << v) | (1u << w); }
  std::uint32_t out_mask() const { return (1u << v_out) | (1u << w_out); }
  /// Rate can be positive only for two distinct incoming and two distinct
  /// outgoing velocities with disjoint pairs.
  bool is_active() const;
  bool operator==(const Collision&) const = default;
};

/// All quadruples (v, w, v', w') in 𝓥⁴ with v + w = v' + w'.
class CollisionSet {
 public:
  explicit CollisionSet(const VelocitySet& vs, double tol = 1e-12);

  const std::vector<Collision>& all() const { return all_; }
  /// Subset that can ever fire (see Collision::is_active).
  const std::vector<Collision>& active() const { return active_; }

 private:
  std::vector<Collision> all_;
  std::vector<Collision> active_;
};

}  // namespace bdex
