#include "bdex/lattice.hpp"

#include <bit>
#include <istream>
#include <ostream>
#include <string>

#include "bdex/errors.hpp"

namespace bdex {

Lattice::Lattice(int N, int dim, Wall wall) : N_(N), dim_(dim), wall_(wall) {
  if (N < 2) throw ConfigError("lattice: N must be at least 2");
  if (dim < 1 || dim > kMaxDim)
    throw ConfigError("lattice: dimension must be in 1.." + std::to_string(kMaxDim));
  sites_ = static_cast<std::size_t>(N - 1);
  for (int j = 1; j < dim; ++j) sites_ *= static_cast<std::size_t>(N);
  for (int j = 0; j < dim; ++j) {
    Coords plus{}, minus{};
    plus[j] = 1;
    minus[j] = -1;
    nearest_.push_back(plus);
    nearest_.push_back(minus);
  }
}

Coords Lattice::coords(Site x) const {
  if (!valid(x)) throw StructuralError("lattice: site index out of range");
  Coords c{};
  c[0] = static_cast<int>(x % static_cast<std::size_t>(N_ - 1)) + 1;
  std::size_t rest = x / static_cast<std::size_t>(N_ - 1);
  for (int j = 1; j < dim_; ++j) {
    c[j] = static_cast<int>(rest % static_cast<std::size_t>(N_));
    rest /= static_cast<std::size_t>(N_);
  }
  return c;
}

Site Lattice::site(const Coords& c) const {
  if (c[0] < 1 || c[0] > N_ - 1) throw StructuralError("lattice: x1 out of range");
  Site idx = 0;
  for (int j = dim_ - 1; j >= 1; --j) {
    if (c[j] < 0 || c[j] >= N_) throw StructuralError("lattice: transverse coordinate out of range");
    idx = idx * static_cast<std::size_t>(N_) + static_cast<std::size_t>(c[j]);
  }
  return idx * static_cast<std::size_t>(N_ - 1) + static_cast<std::size_t>(c[0] - 1);
}

std::optional<Site> Lattice::displace(Site x, std::span<const int> y) const {
  Coords c = coords(x);
  const int len = N_ - 1;
  int x1 = c[0] + y[0];
  if (wall_ == Wall::Periodic) {
    x1 = ((x1 - 1) % len + len) % len + 1;
  } else if (x1 < 1 || x1 > len) {
    return std::nullopt;
  }
  c[0] = x1;
  for (int j = 1; j < dim_; ++j) c[j] = ((c[j] + y[j]) % N_ + N_) % N_;
  const Site target = site(c);
  if (target == x) return std::nullopt;
  return target;
}

std::vector<Neighbor> Lattice::neighbors(Site x) const {
  std::vector<Neighbor> out;
  for (int dir = 0; dir < static_cast<int>(nearest_.size()); ++dir)
    if (auto y = displace(x, std::span<const int>(nearest_[dir].data(), dim_)))
      out.push_back({*y, dir});
  return out;
}

bool Lattice::is_left(Site x) const {
  return wall_ == Wall::Reservoir && coords(x)[0] == 1;
}

bool Lattice::is_right(Site x) const {
  return wall_ == Wall::Reservoir && coords(x)[0] == N_ - 1;
}

BoundarySide Lattice::classify(Site x) const {
  if (is_left(x)) return BoundarySide::Left;
  if (is_right(x)) return BoundarySide::Right;
  return BoundarySide::Bulk;
}

std::array<double, kMaxDim> Lattice::position(Site x) const {
  const Coords c = coords(x);
  std::array<double, kMaxDim> u{};
  for (int j = 0; j < dim_; ++j) u[j] = static_cast<double>(c[j]) / N_;
  return u;
}

Configuration::Configuration(std::size_t sites, std::size_t velocities)
    : velocities_(velocities), masks_(sites, 0u) {
  if (velocities > kMaxVelocities) throw StructuralError("configuration: too many velocities");
}

std::size_t Configuration::count(std::size_t v) const {
  std::size_t n = 0;
  for (auto m : masks_) n += (m >> v) & 1u;
  return n;
}

ConservedVector totals(const Configuration& eta, const Lattice& lattice, const VelocitySet& vs) {
  if (eta.site_count() != lattice.site_count() || eta.velocity_count() != vs.size())
    throw StructuralError("configuration shape does not match lattice and velocity set");
  // Per-velocity counts first: exact integers, then one weighted sum.
  ConservedVector out{StateVec::Zero(vs.dim() + 1)};
  for (std::size_t v = 0; v < vs.size(); ++v)
    out.values += static_cast<double>(eta.count(v)) * vs.lifted(v);
  return out;
}

namespace {

constexpr char kMagic[4] = {'B', 'D', 'X', 'C'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}
std::uint64_t get_le(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw StructuralError("checkpoint: truncated header");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Configuration& eta, const Lattice& lattice) {
  if (eta.site_count() != lattice.site_count())
    throw StructuralError("checkpoint: configuration does not match lattice");
  out.write(kMagic, 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(lattice.scale()));
  put_u32(out, static_cast<std::uint32_t>(lattice.dim()));
  put_u32(out, static_cast<std::uint32_t>(eta.velocity_count()));
  put_u64(out, eta.site_count());
  const std::size_t nv = eta.velocity_count();
  const std::size_t bits = eta.site_count() * nv;
  std::vector<unsigned char> bytes((bits + 7) / 8, 0);
  for (Site x = 0; x < eta.site_count(); ++x)
    for (std::size_t v = 0; v < nv; ++v)
      if (eta.get(x, v)) {
        const std::size_t b = x * nv + v;
        bytes[b / 8] |= static_cast<unsigned char>(1u << (b % 8));
      }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Configuration read_checkpoint(std::istream& in, const Lattice& lattice, const VelocitySet& vs) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4))
    throw StructuralError("checkpoint: bad magic");
  if (get_le(in, 4) != 1) throw StructuralError("checkpoint: unsupported version");
  const auto N = get_le(in, 4);
  const auto d = get_le(in, 4);
  const auto nv = get_le(in, 4);
  const auto sites = get_le(in, 8);
  if (N != static_cast<std::uint64_t>(lattice.scale()) ||
      d != static_cast<std::uint64_t>(lattice.dim()) || nv != vs.size() ||
      sites != lattice.site_count())
    throw StructuralError("checkpoint: header does not match lattice and velocity set");
  Configuration eta(lattice.site_count(), vs.size());
  const std::size_t bits = sites * nv;
  std::vector<unsigned char> bytes((bits + 7) / 8);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
    throw StructuralError("checkpoint: truncated payload");
  for (std::size_t b = 0; b < bits; ++b)
    if ((bytes[b / 8] >> (b % 8)) & 1u) eta.set(b / nv, b % nv, true);
  return eta;
}

}  // namespace bdex
