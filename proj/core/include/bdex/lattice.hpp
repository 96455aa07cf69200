#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "bdex/thermo.hpp"

namespace bdex {

using Site = std::size_t;
using Coords = std::array<int, kMaxDim>;

enum class BoundarySide { Left, Right, Bulk };

/// Treatment of the first coordinate.
enum class Wall {
  /// x₁ ∈ {1, …, N-1}, no wrap; reservoirs act at x₁ = 1 and x₁ = N-1.
  Reservoir,
  /// x₁ wraps on a ring of N-1 sites; no boundary sites. Used to check
  /// invariance of product measures for the closed system.
  Periodic,
};

struct Neighbor {
  Site site;
  /// Index into Lattice::nearest_displacements(): +e₁, -e₁, +e₂, -e₂, …
  int direction;
};

/// The cylinder D_N^d = {1, …, N-1} × 𝕋_N^{d-1}.
///
/// Sites are numbered with x₁ fastest: index = (x₁ - 1) + (N-1)(x₂ + N x₃).
class Lattice {
 public:
  Lattice(int N, int dim, Wall wall = Wall::Reservoir);

  int scale() const { return N_; }
  int dim() const { return dim_; }
  Wall wall() const { return wall_; }
  std::size_t site_count() const { return sites_; }
  /// Number of sites along x₁ (N - 1).
  int length() const { return N_ - 1; }

  Coords coords(Site x) const;
  Site site(const Coords& c) const;
  bool valid(Site x) const { return x < sites_; }

  /// x + y, wrapping transverse coordinates (and x₁ when periodic). Returns
  /// nullopt if the move leaves the cylinder through the x₁ wall or lands
  /// back on x.
  std::optional<Site> displace(Site x, std::span<const int> y) const;

  /// Nearest neighbors x ± e_j that stay in the cylinder.
  std::vector<Neighbor> neighbors(Site x) const;

  BoundarySide classify(Site x) const;
  /// Sites with x₁ = 1 or x₁ = N-1 under Wall::Reservoir; both sides when N = 2.
  bool is_left(Site x) const;
  bool is_right(Site x) const;

  /// Macroscopic position x/N.
  std::array<double, kMaxDim> position(Site x) const;

  /// ±e_j, in the order used by Neighbor::direction.
  const std::vector<Coords>& nearest_displacements() const { return nearest_; }

 private:
  int N_;
  int dim_;
  Wall wall_;
  std::size_t sites_;
  std::vector<Coords> nearest_;
};

/// η(x, v) ∈ {0,1}, one bitmask per site (all velocities of a site contiguous).
class Configuration {
 public:
  Configuration() = default;
  Configuration(std::size_t sites, std::size_t velocities);

  std::size_t site_count() const { return masks_.size(); }
  std::size_t velocity_count() const { return velocities_; }

  bool get(Site x, std::size_t v) const { return (masks_[x] >> v) & 1u; }
  void set(Site x, std::size_t v, bool occupied) {
    masks_[x] = occupied ? (masks_[x] | (1u << v)) : (masks_[x] & ~(1u << v));
  }
  void flip(Site x, std::size_t v) { masks_[x] ^= (1u << v); }

  LocalState local(Site x) const { return {masks_[x]}; }
  std::uint32_t mask(Site x) const { return masks_[x]; }
  void set_mask(Site x, std::uint32_t m) { masks_[x] = m & full_mask(); }
  std::uint32_t full_mask() const {
    return velocities_ >= 32 ? ~0u : ((1u << velocities_) - 1u);
  }

  /// Number of particles with velocity v.
  std::size_t count(std::size_t v) const;

  bool operator==(const Configuration&) const = default;

 private:
  std::size_t velocities_ = 0;
  std::vector<std::uint32_t> masks_;
};

/// Σ_x 𝑰(η_x). Throws StructuralError if shapes disagree.
ConservedVector totals(const Configuration& eta, const Lattice& lattice, const VelocitySet& vs);

/// Binary checkpoint.
///
/// Layout (all integers little-endian):
///   bytes 0-3   magic "BDXC"
///   bytes 4-7   uint32 format version (1)
///   bytes 8-11  uint32 N
///   bytes 12-15 uint32 d
///   bytes 16-19 uint32 |𝓥|
///   bytes 20-27 uint64 site count
///   then ceil(sites·|𝓥| / 8) bytes: bit b = site·|𝓥| + v is bit (b mod 8)
///   of byte b/8, least significant bit first.
void write_checkpoint(std::ostream& out, const Configuration& eta, const Lattice& lattice);
Configuration read_checkpoint(std::istream& in, const Lattice& lattice, const VelocitySet& vs);

}  // namespace bdex
