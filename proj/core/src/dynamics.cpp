#include "bdex/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "bdex/errors.hpp"

namespace bdex {

// ---------------------------------------------------------------- jump law

JumpLaw JumpLaw::nearest_neighbor(const VelocitySet& vs) {
  if (vs.max_l1() > 1.0 + 1e-12)
    throw ConfigError("nearest-neighbor jump law needs sum_j |v_j| <= 1; rescale the velocity set");
  const int d = vs.dim();
  std::vector<std::vector<JumpEntry>> laws(vs.size());
  for (std::size_t v = 0; v < vs.size(); ++v) {
    double l1 = 0.0;
    for (int j = 0; j < d; ++j) l1 += std::abs(vs.component(v, j));
    for (int j = 0; j < d; ++j) {
      const double vj = vs.component(v, j);
      const double a = std::abs(vj) + (1.0 - l1) / d;
      for (int sign : {1, -1}) {
        const double p = 0.5 * (a + sign * vj);
        if (p <= 0.0) continue;
        Coords y{};
        y[j] = sign;
        laws[v].push_back({y, p});
      }
    }
  }
  return create(vs, std::move(laws), 1);
}

JumpLaw JumpLaw::create(const VelocitySet& vs, std::vector<std::vector<JumpEntry>> per_velocity,
                        int range) {
  if (per_velocity.size() != vs.size())
    throw ConfigError("jump law: one distribution per velocity required");
  if (range < 1) throw ConfigError("jump law: range must be positive");
  for (std::size_t v = 0; v < vs.size(); ++v) {
    double total = 0.0;
    std::array<double, kMaxDim> mean{};
    for (const auto& e : per_velocity[v]) {
      if (!(e.probability >= 0.0)) throw ConfigError("jump law: negative probability");
      for (int j = 0; j < vs.dim(); ++j) {
        if (std::abs(e.displacement[j]) > range)
          throw ConfigError("jump law: displacement beyond declared range");
        mean[j] += e.displacement[j] * e.probability;
      }
      total += e.probability;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw ConfigError("jump law: probabilities for velocity " + std::to_string(v) +
                        " do not sum to 1");
    for (int j = 0; j < vs.dim(); ++j)
      if (std::abs(mean[j] - vs.component(v, j)) > 1e-15)
        throw ConfigError("jump law: mean displacement differs from velocity " + std::to_string(v));
  }
  JumpLaw law;
  law.laws_ = std::move(per_velocity);
  law.range_ = range;
  return law;
}

double JumpLaw::probability(std::size_t v, const Coords& y) const {
  for (const auto& e : laws_[v])
    if (e.displacement == y) return e.probability;
  return 0.0;
}

// -------------------------------------------------------------- reservoirs

ReservoirProfiles ReservoirProfiles::constant(const std::vector<double>& alpha,
                                              const std::vector<double>& beta) {
  ReservoirProfiles out;
  for (double a : alpha) out.alpha.push_back([a](std::span<const double>) { return a; });
  for (double b : beta) out.beta.push_back([b](std::span<const double>) { return b; });
  return out;
}

void ReservoirProfiles::validate(const VelocitySet& vs, int dim, int samples) const {
  if (alpha.size() != vs.size() || beta.size() != vs.size())
    throw ConfigError("reservoirs: need one alpha and one beta profile per velocity");
  const int td = dim - 1;
  std::size_t points = 1;
  for (int j = 0; j < td; ++j) points *= static_cast<std::size_t>(samples);
  std::vector<double> u(static_cast<std::size_t>(td));
  for (const auto* family : {&alpha, &beta}) {
    for (std::size_t v = 0; v < vs.size(); ++v) {
      double lo = 1.0, hi = 0.0;
      for (std::size_t p = 0; p < points; ++p) {
        std::size_t rest = p;
        for (int j = 0; j < td; ++j) {
          u[j] = static_cast<double>(rest % samples) / samples;
          rest /= samples;
        }
        const double val = (*family)[v](u);
        if (!std::isfinite(val)) throw ConfigError("reservoirs: non-finite profile value");
        lo = std::min(lo, val);
        hi = std::max(hi, val);
      }
      if (!(lo > 0.0 && hi < 1.0))
        throw ConfigError("reservoirs: profile for velocity " + std::to_string(v) +
                          " leaves (0,1)");
    }
  }
}

// ------------------------------------------------------------------- model

Model::Model(Lattice lattice, VelocitySet velocities, ReservoirProfiles reservoirs,
             DynamicsOptions options)
    : Model(lattice, velocities, JumpLaw::nearest_neighbor(velocities), std::move(reservoirs),
            options) {}

Model::Model(Lattice lattice, VelocitySet velocities, JumpLaw jumps, ReservoirProfiles reservoirs,
             DynamicsOptions options)
    : lattice_(lattice),
      velocities_(std::move(velocities)),
      jumps_(std::move(jumps)),
      collisions_(velocities_),
      reservoirs_(std::move(reservoirs)),
      options_(options) {
  if (lattice_.dim() != velocities_.dim())
    throw ConfigError("model: lattice and velocity set dimensions differ");
  reservoirs_.validate(velocities_, lattice_.dim());
  build();
}

void Model::build() {
  displacements_ = lattice_.nearest_displacements();
  for (std::size_t v = 0; v < velocities_.size(); ++v)
    for (const auto& e : jumps_.support(v))
      if (std::find(displacements_.begin(), displacements_.end(), e.displacement) ==
          displacements_.end())
        displacements_.push_back(e.displacement);
  jump_rates_.assign(velocities_.size(), std::vector<double>(displacements_.size(), 0.0));
  for (std::size_t v = 0; v < velocities_.size(); ++v)
    for (std::size_t r = 0; r < displacements_.size(); ++r)
      jump_rates_[v][r] = jump_probability(*this, displacements_[r], v);
}

double Model::alpha_at(Site x, std::size_t v) const {
  const auto u = lattice_.position(x);
  return reservoirs_.alpha[v](std::span<const double>(u.data() + 1, lattice_.dim() - 1));
}

double Model::beta_at(Site x, std::size_t v) const {
  const auto u = lattice_.position(x);
  return reservoirs_.beta[v](std::span<const double>(u.data() + 1, lattice_.dim() - 1));
}

// ------------------------------------------------------------------- rates

double jump_probability(const Model& model, const Coords& y, std::size_t v) {
  int l1 = 0, nonzero = 0;
  for (int j = 0; j < model.lattice().dim(); ++j) {
    l1 += std::abs(y[j]);
    nonzero += y[j] != 0;
  }
  const double symmetric = (l1 == 1 && nonzero == 1) ? 0.5 : 0.0;
  return symmetric + model.jumps().probability(v, y) / model.lattice().scale();
}

double exclusion_rate(const Configuration& eta, const Model& model, Site x, const Coords& y,
                      std::size_t v) {
  if (!eta.get(x, v)) return 0.0;
  const auto z = model.lattice().displace(x, std::span<const int>(y.data(), model.lattice().dim()));
  if (!z || eta.get(*z, v)) return 0.0;
  return jump_probability(model, y, v);
}

Collision make_collision(const VelocitySet& vs, std::size_t v, std::size_t w, std::size_t v_out,
                         std::size_t w_out) {
  const std::size_t n = vs.size();
  if (v >= n || w >= n || v_out >= n || w_out >= n)
    throw StructuralError("collision: velocity index out of range");
  for (int j = 0; j < vs.dim(); ++j)
    if (std::abs(vs.component(v, j) + vs.component(w, j) - vs.component(v_out, j) -
                 vs.component(w_out, j)) > 1e-12)
      throw StructuralError("collision does not conserve momentum");
  return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(w),
          static_cast<std::uint8_t>(v_out), static_cast<std::uint8_t>(w_out)};
}

double collision_rate(const Configuration& eta, Site y, const Collision& q) {
  if (!q.is_active()) return 0.0;
  const std::uint32_t m = eta.mask(y);
  return ((m & q.in_mask()) == q.in_mask() && (m & q.out_mask()) == 0) ? 1.0 : 0.0;
}

double boundary_rate(const Configuration& eta, const Model& model, Site x, std::size_t v) {
  const bool occupied = eta.get(x, v);
  double rate = 0.0;
  if (model.lattice().is_left(x)) {
    const double a = model.alpha_at(x, v);
    rate += occupied ? 1.0 - a : a;
  }
  if (model.lattice().is_right(x)) {
    const double b = model.beta_at(x, v);
    rate += occupied ? 1.0 - b : b;
  }
  return rate;
}

double event_rate(const Configuration& eta, const Model& model, const Event& e) {
  switch (e.kind) {
    case EventKind::Exclusion: {
      const auto& y = model.displacements().at(e.displacement);
      const auto z = model.lattice().displace(e.site, std::span<const int>(y.data(), model.lattice().dim()));
      if (!z || *z != e.target) return 0.0;
      return exclusion_rate(eta, model, e.site, y, e.velocity);
    }
    case EventKind::Collision:
      return collision_rate(eta, e.site, e.collision);
    case EventKind::Boundary: {
      const bool occupied = eta.get(e.site, e.velocity);
      if (e.side == BoundarySide::Left && model.lattice().is_left(e.site)) {
        const double a = model.alpha_at(e.site, e.velocity);
        return occupied ? 1.0 - a : a;
      }
      if (e.side == BoundarySide::Right && model.lattice().is_right(e.site)) {
        const double b = model.beta_at(e.site, e.velocity);
        return occupied ? 1.0 - b : b;
      }
      return 0.0;
    }
  }
  return 0.0;
}

void apply_event(Configuration& eta, const Model& model, const Event& e) {
  if (!(event_rate(eta, model, e) > 0.0)) throw std::logic_error("apply_event: event has zero rate");
  switch (e.kind) {
    case EventKind::Exclusion:
      eta.flip(e.site, e.velocity);
      eta.flip(e.target, e.velocity);
      break;
    case EventKind::Collision:
      eta.set_mask(e.site, (eta.mask(e.site) & ~e.collision.in_mask()) | e.collision.out_mask());
      break;
    case EventKind::Boundary:
      eta.flip(e.site, e.velocity);
      break;
  }
}

// ------------------------------------------------- composition-rejection

CompositionRejection::CompositionRejection(std::size_t channels)
    : rates_(channels, 0.0),
      bin_of_(channels, -1),
      slot_in_bin_(channels, 0),
      bins_(kMaxExponent - kMinExponent + 1) {
  for (int e = kMinExponent; e <= kMaxExponent; ++e)
    bins_[e - kMinExponent].cap = std::ldexp(1.0, e);
}

void CompositionRejection::set(std::size_t c, double rate) {
  const double old = rates_[c];
  if (rate == old) return;
  if (!(rate >= 0.0) || !std::isfinite(rate))
    throw std::invalid_argument("composition-rejection: rate must be finite and nonnegative");
  if (bin_of_[c] >= 0) {
    Bin& b = bins_[bin_of_[c]];
    const std::uint32_t slot = slot_in_bin_[c];
    const std::uint32_t moved = b.members.back();
    b.members[slot] = moved;
    slot_in_bin_[moved] = slot;
    b.members.pop_back();
    b.sum = b.members.empty() ? 0.0 : b.sum - old;
    bin_of_[c] = -1;
  }
  rates_[c] = rate;
  if (rate > 0.0) {
    int e = 0;
    std::frexp(rate, &e);
    if (e < kMinExponent || e > kMaxExponent)
      throw std::out_of_range("composition-rejection: rate outside supported range");
    const int idx = e - kMinExponent;
    Bin& b = bins_[idx];
    if (b.members.empty() && std::find(used_bins_.begin(), used_bins_.end(), idx) == used_bins_.end())
      used_bins_.push_back(idx);
    bin_of_[c] = static_cast<std::int16_t>(idx);
    slot_in_bin_[c] = static_cast<std::uint32_t>(b.members.size());
    b.members.push_back(static_cast<std::uint32_t>(c));
    b.sum += rate;
  }
  total_ += rate - old;
  if ((++updates_ & ((std::uint64_t{1} << 20) - 1)) == 0) resum();
}

double CompositionRejection::resum() {
  double drift = 0.0;
  double total = 0.0;
  for (int idx : used_bins_) {
    Bin& b = bins_[idx];
    double s = 0.0;
    for (auto m : b.members) s += rates_[m];
    if (s > 0.0) drift = std::max(drift, std::abs(s - b.sum) / s);
    b.sum = s;
    total += s;
  }
  total_ = total;
  return drift;
}

std::size_t CompositionRejection::sample(Philox& rng) const {
  const double u = rng.uniform() * total_;
  double acc = 0.0;
  const Bin* chosen = nullptr;
  for (int idx : used_bins_) {
    const Bin& b = bins_[idx];
    if (b.members.empty()) continue;
    chosen = &b;
    acc += b.sum;
    if (u < acc) break;
  }
  if (chosen == nullptr) throw std::logic_error("composition-rejection: no positive rate");
  while (true) {
    const auto m = chosen->members[rng.below(chosen->members.size())];
    if (rng.uniform() * chosen->cap < rates_[m]) return m;
  }
}

// --------------------------------------------------------------- simulator

Simulator::Simulator(const Model& model, Configuration initial, Philox rng)
    : model_(model), eta_(std::move(initial)), rng_(rng) {
  if (eta_.site_count() != model_.lattice().site_count() ||
      eta_.velocity_count() != model_.velocities().size())
    throw StructuralError("simulator: configuration shape does not match model");
  const double N = model_.lattice().scale();
  time_scale_ = N * N;
  build_channels();
}

void Simulator::build_channels() {
  const auto& lat = model_.lattice();
  const auto& vs = model_.velocities();
  const std::size_t nv = vs.size();
  const auto& opts = model_.options();
  channels_.clear();
  for (Site x = 0; x < lat.site_count(); ++x) {
    if (opts.exclusion) {
      for (std::size_t v = 0; v < nv; ++v)
        for (std::size_t r = 0; r < model_.displacements().size(); ++r) {
          const double base = model_.jump_rate(v, r);
          if (base <= 0.0) continue;
          const auto& y = model_.displacements()[r];
          if (auto z = lat.displace(x, std::span<const int>(y.data(), lat.dim())))
            channels_.push_back({EventKind::Exclusion, static_cast<std::uint8_t>(v),
                                 static_cast<std::uint16_t>(r), BoundarySide::Bulk, x, *z, base});
        }
    }
    if (opts.collisions) {
      const auto& qs = model_.collisions().active();
      for (std::size_t q = 0; q < qs.size(); ++q)
        channels_.push_back({EventKind::Collision, 0, static_cast<std::uint16_t>(q),
                             BoundarySide::Bulk, x, x, 1.0});
    }
    if (opts.boundary) {
      for (std::size_t v = 0; v < nv; ++v) {
        if (lat.is_left(x))
          channels_.push_back({EventKind::Boundary, static_cast<std::uint8_t>(v), 0,
                               BoundarySide::Left, x, x, model_.alpha_at(x, v)});
        if (lat.is_right(x))
          channels_.push_back({EventKind::Boundary, static_cast<std::uint8_t>(v), 0,
                               BoundarySide::Right, x, x, model_.beta_at(x, v)});
      }
    }
  }

  // Slot (x, v) -> channels whose rate reads η(x, v).
  const std::size_t slots = lat.site_count() * nv;
  std::vector<std::vector<std::uint32_t>> lists(slots);
  const auto& qs = model_.collisions().active();
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    const auto& ch = channels_[c];
    const auto id = static_cast<std::uint32_t>(c);
    switch (ch.kind) {
      case EventKind::Exclusion:
        lists[ch.site * nv + ch.velocity].push_back(id);
        lists[ch.target * nv + ch.velocity].push_back(id);
        break;
      case EventKind::Collision: {
        const auto& q = qs[ch.aux];
        for (auto v : {q.v, q.w, q.v_out, q.w_out}) lists[ch.site * nv + v].push_back(id);
        break;
      }
      case EventKind::Boundary:
        lists[ch.site * nv + ch.velocity].push_back(id);
        break;
    }
  }
  slot_offsets_.assign(slots + 1, 0);
  slot_channels_.clear();
  for (std::size_t s = 0; s < slots; ++s) {
    slot_offsets_[s] = static_cast<std::uint32_t>(slot_channels_.size());
    slot_channels_.insert(slot_channels_.end(), lists[s].begin(), lists[s].end());
  }
  slot_offsets_[slots] = static_cast<std::uint32_t>(slot_channels_.size());

  sampler_ = CompositionRejection(channels_.size());
  for (std::size_t c = 0; c < channels_.size(); ++c) sampler_.set(c, channel_rate(channels_[c]));
}

double Simulator::channel_rate(const Channel& c) const {
  switch (c.kind) {
    case EventKind::Exclusion:
      return (eta_.get(c.site, c.velocity) && !eta_.get(c.target, c.velocity)) ? c.base : 0.0;
    case EventKind::Collision: {
      const auto& q = model_.collisions().active()[c.aux];
      const std::uint32_t m = eta_.mask(c.site);
      return ((m & q.in_mask()) == q.in_mask() && (m & q.out_mask()) == 0) ? 1.0 : 0.0;
    }
    case EventKind::Boundary:
      return eta_.get(c.site, c.velocity) ? 1.0 - c.base : c.base;
  }
  return 0.0;
}

Event Simulator::channel_event(const Channel& c) const {
  Event e;
  e.kind = c.kind;
  e.site = c.site;
  e.target = c.target;
  e.velocity = c.velocity;
  e.side = c.side;
  if (c.kind == EventKind::Exclusion) e.displacement = c.aux;
  if (c.kind == EventKind::Collision) e.collision = model_.collisions().active()[c.aux];
  return e;
}

void Simulator::touch_slot(Site x, std::size_t v) {
  const std::size_t s = x * model_.velocities().size() + v;
  for (auto i = slot_offsets_[s]; i < slot_offsets_[s + 1]; ++i) {
    const auto c = slot_channels_[i];
    sampler_.set(c, channel_rate(channels_[c]));
  }
}

std::size_t Simulator::select_and_apply(Event& event) {
  const std::size_t c = sampler_.sample(rng_);
  const Channel& ch = channels_[c];
  event = channel_event(ch);
  switch (ch.kind) {
    case EventKind::Exclusion:
      eta_.flip(ch.site, ch.velocity);
      eta_.flip(ch.target, ch.velocity);
      touch_slot(ch.site, ch.velocity);
      touch_slot(ch.target, ch.velocity);
      ++counts_.exclusion;
      break;
    case EventKind::Collision: {
      const auto& q = event.collision;
      eta_.set_mask(ch.site, (eta_.mask(ch.site) & ~q.in_mask()) | q.out_mask());
      for (auto v : {q.v, q.w, q.v_out, q.w_out}) touch_slot(ch.site, v);
      ++counts_.collision;
      break;
    }
    case EventKind::Boundary:
      eta_.flip(ch.site, ch.velocity);
      touch_slot(ch.site, ch.velocity);
      ++counts_.boundary;
      break;
  }
  ++events_;
  if (audit_every_ != 0 && events_ % audit_every_ == 0 && !audit())
    throw std::logic_error("simulator: incremental rate table differs from recomputation");
  return c;
}

StepResult Simulator::step() {
  const double total = sampler_.total();
  if (!(total > 0.0)) throw std::logic_error("simulator: absorbing state (total rate is zero)");
  StepResult out;
  out.waiting_time = rng_.exponential(total * time_scale_);
  select_and_apply(out.event);
  time_ += out.waiting_time;
  return out;
}

void Simulator::run(double horizon, std::span<const double> sample_times,
                    const Observer& observer) {
  std::size_t next = 0;
  while (next < sample_times.size() && sample_times[next] < time_) ++next;
  while (true) {
    const double total = sampler_.total();
    const double wait = total > 0.0 ? rng_.exponential(total * time_scale_)
                                    : std::numeric_limits<double>::infinity();
    const double t_event = time_ + wait;
    while (next < sample_times.size() && sample_times[next] <= horizon &&
           sample_times[next] < t_event) {
      if (observer) observer(sample_times[next], eta_);
      ++next;
    }
    if (t_event > horizon) {
      time_ = horizon;
      return;
    }
    Event e;
    select_and_apply(e);
    time_ = t_event;
  }
}

bool Simulator::audit() const {
  for (std::size_t c = 0; c < channels_.size(); ++c)
    if (sampler_.rate(c) != channel_rate(channels_[c])) return false;
  double fresh = 0.0;
  for (std::size_t c = 0; c < channels_.size(); ++c) fresh += sampler_.rate(c);
  return std::abs(fresh - sampler_.total()) <= 1e-9 * std::max(1.0, fresh);
}

Configuration simulate(const Model& model, Configuration initial, double horizon,
                       std::span<const double> sample_times, const Simulator::Observer& observer,
                       Philox rng) {
  if (horizon < 0.0) throw ConfigError("simulate: horizon must be nonnegative");
  Simulator sim(model, std::move(initial), rng);
  sim.run(horizon, sample_times, observer);
  return sim.state();
}

// ----------------------------------------------------------- exact generator

Configuration ExactGenerator::decode(std::size_t index, std::size_t sites, std::size_t velocities) {
  Configuration eta(sites, velocities);
  for (std::size_t b = 0; b < sites * velocities; ++b)
    if ((index >> b) & 1u) eta.set(b / velocities, b % velocities, true);
  return eta;
}

std::size_t ExactGenerator::encode(const Configuration& eta) {
  std::size_t index = 0;
  const std::size_t nv = eta.velocity_count();
  for (Site x = 0; x < eta.site_count(); ++x)
    index |= static_cast<std::size_t>(eta.mask(x)) << (x * nv);
  return index;
}

double ExactGenerator::entry(std::size_t i, std::size_t j) const {
  if (i == j) return diagonal_[i];
  const auto& r = rows_[i];
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const auto& e, std::size_t col) { return e.first < col; });
  return (it != r.end() && it->first == j) ? it->second : 0.0;
}

double ExactGenerator::row_sum_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double s = 0.0;
    for (const auto& [col, val] : rows_[i]) s += val;
    s += diagonal_[i];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

std::vector<double> ExactGenerator::left_apply(const std::vector<double>& mu) const {
  if (mu.size() != rows_.size()) throw StructuralError("left_apply: vector size mismatch");
  std::vector<double> out(mu.size(), 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    out[i] += mu[i] * diagonal_[i];
    for (const auto& [col, val] : rows_[i]) out[col] += mu[i] * val;
  }
  return out;
}

ExactGenerator assemble_exact_generator(const Model& model) {
  const auto& lat = model.lattice();
  const auto& vs = model.velocities();
  const std::size_t bits = lat.site_count() * vs.size();
  if (bits >= 63 || (std::size_t{1} << bits) > ExactGenerator::kMaxStates)
    throw SizeError("exact generator: 2^" + std::to_string(bits) + " states exceeds the cap of 2^20");
  const std::size_t states = std::size_t{1} << bits;
  const double scale = static_cast<double>(lat.scale()) * lat.scale();
  const auto& opts = model.options();

  ExactGenerator gen;
  gen.rows_.resize(states);
  gen.diagonal_.assign(states, 0.0);
  std::map<std::uint32_t, double> acc;
  for (std::size_t i = 0; i < states; ++i) {
    const Configuration eta = ExactGenerator::decode(i, lat.site_count(), vs.size());
    acc.clear();
    auto add = [&](const Event& e, double rate) {
      if (rate <= 0.0) return;
      Configuration next = eta;
      apply_event(next, model, e);
      acc[static_cast<std::uint32_t>(ExactGenerator::encode(next))] += scale * rate;
    };
    for (Site x = 0; x < lat.site_count(); ++x) {
      for (std::size_t v = 0; v < vs.size(); ++v) {
        if (opts.exclusion) {
          for (std::size_t r = 0; r < model.displacements().size(); ++r) {
            const auto& y = model.displacements()[r];
            const auto z = lat.displace(x, std::span<const int>(y.data(), lat.dim()));
            if (!z) continue;
            Event e;
            e.kind = EventKind::Exclusion;
            e.site = x;
            e.target = *z;
            e.velocity = static_cast<std::uint8_t>(v);
            e.displacement = static_cast<std::uint16_t>(r);
            add(e, exclusion_rate(eta, model, x, y, v));
          }
        }
        if (opts.boundary) {
          for (BoundarySide side : {BoundarySide::Left, BoundarySide::Right}) {
            Event e;
            e.kind = EventKind::Boundary;
            e.site = x;
            e.velocity = static_cast<std::uint8_t>(v);
            e.side = side;
            add(e, event_rate(eta, model, e));
          }
        }
      }
      if (opts.collisions) {
        for (const auto& q : model.collisions().all()) {
          Event e;
          e.kind = EventKind::Collision;
          e.site = x;
          e.collision = q;
          add(e, collision_rate(eta, x, q));
        }
      }
    }
    auto& row = gen.rows_[i];
    row.assign(acc.begin(), acc.end());
    double s = 0.0;
    for (const auto& [col, val] : row) s += val;
    gen.diagonal_[i] = -s;
  }
  return gen;
}

std::vector<double> product_measure_weights(const Model& model, const ChemicalPotential& lambda) {
  const auto& lat = model.lattice();
  const auto& vs = model.velocities();
  const std::size_t bits = lat.site_count() * vs.size();
  if ((std::size_t{1} << bits) > ExactGenerator::kMaxStates)
    throw SizeError("product measure: state space exceeds cap");
  double log_z = 0.0;
  for (std::size_t v = 0; v < vs.size(); ++v) {
    const double s = lambda.values.dot(vs.lifted(v));
    log_z += s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  }
  const std::size_t states = std::size_t{1} << bits;
  std::vector<double> mu(states);
  for (std::size_t i = 0; i < states; ++i) {
    const auto eta = ExactGenerator::decode(i, lat.site_count(), vs.size());
    const auto tot = totals(eta, lat, vs);
    mu[i] = std::exp(lambda.values.dot(tot.values) - static_cast<double>(lat.site_count()) * log_z);
  }
  return mu;
}

DetailedBalanceReport detailed_balance(const ExactGenerator& gen, const std::vector<double>& mu) {
  DetailedBalanceReport rep;
  for (std::size_t i = 0; i < gen.state_count(); ++i)
    for (const auto& [j, rate] : gen.row(i)) {
      ++rep.transitions;
      rep.max_violation = std::max(rep.max_violation, std::abs(mu[i] * rate - mu[j] * gen.entry(j, i)));
    }
  return rep;
}

}  // namespace bdex
