#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bdex/lattice.hpp"
#include "bdex/rng.hpp"

namespace bdex {

struct JumpEntry {
  Coords displacement;
  double probability;
};

/// p(y, v): finite-range transition law with mean Σ_y y p(y, v) = v.
class JumpLaw {
 public:
  /// p(±e_j, v) = (a_j ± v_j)/2 with a_j = |v_j| + (1 - Σ_k |v_k|)/d.
  /// Requires Σ_j |v_j| ≤ 1 for every velocity (ConfigError otherwise).
  static JumpLaw nearest_neighbor(const VelocitySet& vs);

  /// Arbitrary law; validates nonnegativity, normalization, the mean
  /// identity (to 1e-15) and |y_j| ≤ range.
  static JumpLaw create(const VelocitySet& vs, std::vector<std::vector<JumpEntry>> per_velocity,
                        int range);

  std::span<const JumpEntry> support(std::size_t v) const { return laws_[v]; }
  double probability(std::size_t v, const Coords& y) const;
  int range() const { return range_; }

 private:
  std::vector<std::vector<JumpEntry>> laws_;
  int range_ = 1;
};

/// Reservoir density as a function of the transverse coordinate ũ ∈ 𝕋^{d-1}.
using Profile = std::function<double(std::span<const double> transverse)>;

/// α_v (left, x₁ = 1) and β_v (right, x₁ = N-1).
struct ReservoirProfiles {
  std::vector<Profile> alpha;
  std::vector<Profile> beta;

  static ReservoirProfiles constant(const std::vector<double>& alpha,
                                    const std::vector<double>& beta);

  /// Checks that every profile maps into a compact subset of (0,1) by
  /// sampling a grid of `samples` points per transverse direction.
  void validate(const VelocitySet& vs, int dim, int samples = 64) const;
};

/// Which of the three generators are active.
struct DynamicsOptions {
  bool exclusion = true;
  bool collisions = true;
  bool boundary = true;
};

/// Everything that defines 𝓛_N.
class Model {
 public:
  Model(Lattice lattice, VelocitySet velocities, ReservoirProfiles reservoirs,
        DynamicsOptions options = {});
  Model(Lattice lattice, VelocitySet velocities, JumpLaw jumps, ReservoirProfiles reservoirs,
        DynamicsOptions options = {});

  const Lattice& lattice() const { return lattice_; }
  const VelocitySet& velocities() const { return velocities_; }
  const JumpLaw& jumps() const { return jumps_; }
  const CollisionSet& collisions() const { return collisions_; }
  const ReservoirProfiles& reservoirs() const { return reservoirs_; }
  const DynamicsOptions& options() const { return options_; }

  /// Union of ±e_j and every jump-law support; exclusion events refer to
  /// displacements by index into this list.
  const std::vector<Coords>& displacements() const { return displacements_; }
  /// P_N(y_r, v) = ½ Σ_j (δ_{y,e_j} + δ_{y,-e_j}) + p(y, v)/N.
  double jump_rate(std::size_t v, std::size_t r) const { return jump_rates_[v][r]; }

  /// α_v(x̃/N) and β_v(x̃/N) at a boundary site.
  double alpha_at(Site x, std::size_t v) const;
  double beta_at(Site x, std::size_t v) const;

 private:
  void build();

  Lattice lattice_;
  VelocitySet velocities_;
  JumpLaw jumps_;
  CollisionSet collisions_;
  ReservoirProfiles reservoirs_;
  DynamicsOptions options_;
  std::vector<Coords> displacements_;
  std::vector<std::vector<double>> jump_rates_;
};

/// P_N(y, v) for an arbitrary displacement.
double jump_probability(const Model& model, const Coords& y, std::size_t v);

/// η(x,v)(1 - η(x+y,v)) P_N(y,v); zero if x+y leaves the cylinder.
double exclusion_rate(const Configuration& eta, const Model& model, Site x, const Coords& y,
                      std::size_t v);

/// Builds a collision from velocity indices; StructuralError unless
/// v + w = v' + w'.
Collision make_collision(const VelocitySet& vs, std::size_t v, std::size_t w, std::size_t v_out,
                         std::size_t w_out);

/// η(y,v)η(y,w)(1-η(y,v'))(1-η(y,w')) for distinct slots; zero for
/// quadruples that repeat a velocity in the incoming or outgoing pair.
double collision_rate(const Configuration& eta, Site y, const Collision& q);

/// Left: α if empty, 1-α if occupied; Right: same with β; both when the
/// site touches both walls (N = 2); 0 in the bulk.
double boundary_rate(const Configuration& eta, const Model& model, Site x, std::size_t v);

enum class EventKind : std::uint8_t { Exclusion = 0, Collision = 1, Boundary = 2 };

struct Event {
  EventKind kind = EventKind::Exclusion;
  Site site = 0;
  /// Exclusion: destination site.
  Site target = 0;
  std::uint8_t velocity = 0;
  /// Exclusion: index into Model::displacements().
  std::uint16_t displacement = 0;
  Collision collision{};
  /// Boundary: which reservoir.
  BoundarySide side = BoundarySide::Bulk;
};

/// Rate of one event in state eta (per unit microscopic time).
double event_rate(const Configuration& eta, const Model& model, const Event& e);

/// Applies a positive-rate event. Throws std::logic_error if the event has
/// zero rate in eta.
void apply_event(Configuration& eta, const Model& model, const Event& e);

struct EventCounts {
  std::uint64_t exclusion = 0;
  std::uint64_t collision = 0;
  std::uint64_t boundary = 0;
  std::uint64_t total() const { return exclusion + collision + boundary; }
};

/// Selection by composition-rejection: channels are binned by the binary
/// exponent of their rate, a bin is picked proportionally to its sum and a
/// member inside it by rejection against the bin cap 2^e. Expected O(1)
/// per draw and per update.
class CompositionRejection {
 public:
  explicit CompositionRejection(std::size_t channels = 0);

  void set(std::size_t channel, double rate);
  double rate(std::size_t channel) const { return rates_[channel]; }
  double total() const { return total_; }
  std::size_t size() const { return rates_.size(); }

  /// Channel chosen with probability rate / total. Requires total() > 0.
  std::size_t sample(Philox& rng) const;

  /// Recomputes bin sums from scratch; returns the largest relative drift.
  double resum();

 private:
  struct Bin {
    std::vector<std::uint32_t> members;
    double sum = 0.0;
    double cap = 0.0;
  };
  static constexpr int kMinExponent = -80;
  static constexpr int kMaxExponent = 80;

  std::vector<double> rates_;
  std::vector<std::int16_t> bin_of_;
  std::vector<std::uint32_t> slot_in_bin_;
  std::vector<Bin> bins_;
  std::vector<int> used_bins_;
  double total_ = 0.0;
  std::uint64_t updates_ = 0;
};

struct StepResult {
  Event event;
  /// Macroscopic time elapsed: Exponential with rate N² × total rate.
  double waiting_time;
};

/// Exact continuous-time simulation of the process generated by N²𝓛.
///
/// Rates are stored per microscopic time; the clock advances in macroscopic
/// time. After each event only the channels reading the touched slots are
/// recomputed.
class Simulator {
 public:
  using Observer = std::function<void(double time, const Configuration& eta)>;

  Simulator(const Model& model, Configuration initial, Philox rng);

  StepResult step();

  /// Runs until macroscopic time `horizon`, calling `observer` at every
  /// entry of `sample_times` (sorted, within [time(), horizon]).
  void run(double horizon, std::span<const double> sample_times, const Observer& observer);

  double time() const { return time_; }
  const Configuration& state() const { return eta_; }
  const Model& model() const { return model_; }
  /// Σ of channel rates (microscopic units).
  double total_rate() const { return sampler_.total(); }
  const EventCounts& counts() const { return counts_; }

  /// Recomputes every channel from the configuration; returns true when
  /// the incremental table matches exactly.
  bool audit() const;
  /// Run audit() after every `every` events (0 disables); throws
  /// std::logic_error on mismatch.
  void set_audit_interval(std::uint64_t every) { audit_every_ = every; }

  std::size_t channel_count() const { return channels_.size(); }

 private:
  struct Channel {
    EventKind kind;
    std::uint8_t velocity;
    std::uint16_t aux;  // displacement or collision index
    BoundarySide side;
    Site site;
    Site target;
    double base;
  };

  void build_channels();
  double channel_rate(const Channel& c) const;
  Event channel_event(const Channel& c) const;
  void touch_slot(Site x, std::size_t v);
  std::size_t select_and_apply(Event& event);

  const Model& model_;
  Configuration eta_;
  Philox rng_;
  double time_ = 0.0;
  double time_scale_;
  std::vector<Channel> channels_;
  std::vector<std::uint32_t> slot_offsets_;
  std::vector<std::uint32_t> slot_channels_;
  CompositionRejection sampler_;
  EventCounts counts_;
  std::uint64_t audit_every_ = 0;
  std::uint64_t events_ = 0;
};

/// Runs a fresh Simulator from `initial` to `horizon`; returns the final
/// configuration.
Configuration simulate(const Model& model, Configuration initial, double horizon,
                       std::span<const double> sample_times, const Simulator::Observer& observer,
                       Philox rng);

/// Full generator matrix N²(𝓛ᵇ + 𝓛ᶜ + 𝓛ᵉˣ) on {0,1}^{sites × 𝓥}, for tiny
/// systems only. State index bit b = site·|𝓥| + v.
class ExactGenerator {
 public:
  static constexpr std::size_t kMaxStates = std::size_t{1} << 20;

  std::size_t state_count() const { return diagonal_.size(); }
  /// Off-diagonal entries of row i, sorted by column.
  const std::vector<std::pair<std::uint32_t, double>>& row(std::size_t i) const { return rows_[i]; }
  double diagonal(std::size_t i) const { return diagonal_[i]; }
  double entry(std::size_t i, std::size_t j) const;

  /// max_i |Σ_j L_ij|, summing off-diagonals in column order then the diagonal.
  double row_sum_residual() const;
  /// (μᵀL)_j for all j.
  std::vector<double> left_apply(const std::vector<double>& mu) const;

  static Configuration decode(std::size_t index, std::size_t sites, std::size_t velocities);
  static std::size_t encode(const Configuration& eta);

 private:
  friend ExactGenerator assemble_exact_generator(const Model& model);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows_;
  std::vector<double> diagonal_;
};

/// Throws SizeError when 2^{sites·|𝓥|} exceeds ExactGenerator::kMaxStates.
ExactGenerator assemble_exact_generator(const Model& model);

/// μ^N_λ(η) for every state index of `model`'s lattice.
std::vector<double> product_measure_weights(const Model& model, const ChemicalPotential& lambda);

struct DetailedBalanceReport {
  std::size_t transitions = 0;
  /// max over transitions of |μ_i L_ij - μ_j L_ji|.
  double max_violation = 0.0;
};

DetailedBalanceReport detailed_balance(const ExactGenerator& gen, const std::vector<double>& mu);

}  // namespace bdex
