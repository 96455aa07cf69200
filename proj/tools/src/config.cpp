#include "bdex_cli/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bdex/errors.hpp"

namespace bdex::cli {

using nlohmann::json;

namespace {

// Cursor into the document that remembers its JSON pointer for messages.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config error at " + (path_.empty() ? std::string("/") : path_) + ": " + what);
  }

  void only(std::initializer_list<const char*> keys) const {
    if (!j_.is_object()) fail("expected an object");
    for (const auto& [k, v] : j_.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        Reader(v, path_ + "/" + k).fail("unknown key");
    }
  }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }
  Reader at(const char* key) const { return {j_.at(key), path_ + "/" + key}; }
  Reader at(std::size_t i) const { return {j_.at(i), path_ + "/" + std::to_string(i)}; }
  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }
  bool is_array() const { return j_.is_array(); }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  long integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<long>();
  }
  std::uint64_t unsigned_integer() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<long>() >= 0))
      fail("expected a nonnegative integer");
    return j_.get<std::uint64_t>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  Expression expression() const {
    if (j_.is_number()) return Expression::constant(number());
    if (!j_.is_string()) fail("expected a number or an expression string");
    try {
      return Expression::parse(j_.get<std::string>());
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }
  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
};

int positive(const Reader& r, long min = 1) {
  const long v = r.integer();
  if (v < min) r.fail("must be at least " + std::to_string(min));
  return static_cast<int>(v);
}

Wall wall_of(const Reader& r) {
  const auto s = r.string();
  if (s == "reservoir") return Wall::Reservoir;
  if (s == "periodic") return Wall::Periodic;
  r.fail("expected \"reservoir\" or \"periodic\"");
}

DynamicsOptions dynamics_of(const Reader& r, DynamicsOptions d) {
  r.only({"exclusion", "collisions", "boundary"});
  if (r.has("exclusion")) d.exclusion = r.at("exclusion").boolean();
  if (r.has("collisions")) d.collisions = r.at("collisions").boolean();
  if (r.has("boundary")) d.boundary = r.at("boundary").boolean();
  return d;
}

std::vector<Expression> expressions(const Reader& r, std::size_t expected, int forbid_from) {
  if (r.size() != expected)
    r.fail("expected " + std::to_string(expected) + " entries (one per velocity)");
  std::vector<Expression> out;
  for (std::size_t i = 0; i < expected; ++i) {
    const Reader e = r.at(i);
    out.push_back(e.expression());
    for (int j = forbid_from; j < 3; ++j)
      if (out.back().uses(j)) e.fail("expression may not depend on u" + std::to_string(j + 1));
  }
  return out;
}

std::vector<double> numbers(const Reader& r) {
  std::vector<double> out;
  for (std::size_t i = 0; i < r.size(); ++i) out.push_back(r.at(i).number());
  return out;
}

void parse_model(const Reader& r, ModelConfig& m, const std::filesystem::path& base) {
  r.only({"dim", "velocities", "velocity_file", "alpha", "beta", "initial", "N", "seed", "replicas",
          "wall", "dynamics"});
  if (r.has("dim")) m.dim = positive(r.at("dim"));
  if (m.dim > kMaxDim) r.at("dim").fail("dimension must be 1, 2 or 3");
  if (r.has("velocities") == r.has("velocity_file")) r.fail("give exactly one of velocities, velocity_file");
  if (r.has("velocities")) {
    const Reader v = r.at("velocities");
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto row = numbers(v.at(i));
      if (static_cast<int>(row.size()) != m.dim) v.at(i).fail("velocity must have dim components");
      m.velocities.push_back(std::move(row));
    }
  } else {
    const Reader f = r.at("velocity_file");
    std::filesystem::path p = f.string();
    if (p.is_relative()) p = base / p;
    VelocitySet vs;
    try {
      vs = VelocitySet::load(p.string());
    } catch (const std::exception& e) {
      f.fail(e.what());
    }
    if (vs.dim() != m.dim) f.fail("file dimension differs from dim");
    for (std::size_t i = 0; i < vs.size(); ++i)
      m.velocities.emplace_back(vs.velocity(i).begin(), vs.velocity(i).end());
  }
  VelocitySet vs;
  try {
    vs = VelocitySet::create(m.dim, m.velocities);
  } catch (const ConfigError& e) {
    r.at(r.has("velocities") ? "velocities" : "velocity_file").fail(e.what());
  }
  if (vs.max_l1() > 1.0 + 1e-12)
    r.at(r.has("velocities") ? "velocities" : "velocity_file")
        .fail("nearest-neighbor jumps need sum_j |v_j| <= 1; rescale the set");
  for (const char* key : {"alpha", "beta", "initial"})
    if (!r.has(key)) r.fail(std::string("missing key ") + key);
  m.alpha = expressions(r.at("alpha"), vs.size(), 0);
  m.beta = expressions(r.at("beta"), vs.size(), 0);
  // Reservoir profiles live on the transverse torus: u1 is not available,
  // nor are coordinates beyond dim.
  for (const auto* family : {&m.alpha, &m.beta})
    for (std::size_t v = 0; v < family->size(); ++v)
      for (int j = m.dim; j < 3; ++j)
        if ((*family)[v].uses(j)) r.fail("reservoir expression uses u" + std::to_string(j + 1));
  m.initial = expressions(r.at("initial"), vs.size(), m.dim);
  if (r.has("N")) {
    const Reader n = r.at("N");
    m.N.clear();
    if (n.is_array()) {
      for (std::size_t i = 0; i < n.size(); ++i) m.N.push_back(positive(n.at(i), 2));
      if (m.N.empty()) n.fail("empty list");
    } else {
      m.N.push_back(positive(n, 2));
    }
  } else {
    m.N = {16};
  }
  if (r.has("seed")) m.seed = r.at("seed").unsigned_integer();
  if (r.has("replicas")) m.replicas = positive(r.at("replicas"));
  if (r.has("wall")) m.wall = wall_of(r.at("wall"));
  if (r.has("dynamics")) m.dynamics = dynamics_of(r.at("dynamics"), m.dynamics);
}

void parse_hydro(const Reader& r, HydroConfig& h) {
  r.only({"m1", "m", "dt", "T", "frames", "refine_levels"});
  if (r.has("m1")) h.m1 = positive(r.at("m1"), 3);
  if (r.has("m")) h.m = positive(r.at("m"), 3);
  if (r.has("dt")) {
    h.dt = r.at("dt").number();
    if (!(h.dt > 0.0)) r.at("dt").fail("must be positive");
  }
  if (r.has("T")) {
    h.T = r.at("T").number();
    if (!(h.T >= 0.0)) r.at("T").fail("must be nonnegative");
  }
  if (r.has("frames")) h.frames = positive(r.at("frames"));
  if (r.has("refine_levels")) h.refine_levels = positive(r.at("refine_levels"), 0);
}

void parse_ldp(const Reader& r, LdpConfig& l, int dim) {
  r.only({"basis_sizes", "control", "energy_time_modes", "energy_u1_modes"});
  if (r.has("basis_sizes")) {
    const Reader b = r.at("basis_sizes");
    l.basis_sizes.clear();
    for (std::size_t i = 0; i < b.size(); ++i) l.basis_sizes.push_back(static_cast<std::size_t>(positive(b.at(i))));
    if (l.basis_sizes.empty()) b.fail("empty list");
  }
  if (r.has("control")) {
    const Reader c = r.at("control");
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Reader t = c.at(i);
      t.only({"component", "time", "m", "n", "coefficient"});
      ControlTerm term{};
      term.mode.component = t.has("component") ? positive(t.at("component"), 0) : 0;
      if (term.mode.component > dim) t.at("component").fail("component exceeds dim");
      term.mode.time = t.has("time") ? positive(t.at("time"), 0) : 0;
      term.mode.space.m = t.has("m") ? positive(t.at("m"), 1) : 1;
      if (t.has("n")) {
        const Reader n = t.at("n");
        if (n.size() > 2) n.fail("at most two transverse indices");
        for (std::size_t j = 0; j < n.size(); ++j) term.mode.space.n[j] = static_cast<int>(n.at(j).integer());
        for (std::size_t j = 0; j < n.size(); ++j)
          if (term.mode.space.n[j] != 0 && static_cast<int>(j) + 1 >= dim)
            n.at(j).fail("transverse index beyond dim");
      }
      if (!t.has("coefficient")) t.fail("missing key coefficient");
      term.coefficient = t.at("coefficient").number();
      l.control.push_back(term);
    }
  }
  if (r.has("energy_time_modes")) l.energy_time_modes = positive(r.at("energy_time_modes"));
  if (r.has("energy_u1_modes")) l.energy_u1_modes = positive(r.at("energy_u1_modes"));
}

void parse_simulate(const Reader& r, SimulateConfig& s) {
  r.only({"T", "samples", "eps", "grid_m1", "block_L"});
  if (r.has("T")) {
    s.T = r.at("T").number();
    if (!(s.T >= 0.0)) r.at("T").fail("must be nonnegative");
  }
  if (r.has("samples")) {
    s.samples = numbers(r.at("samples"));
    if (!std::is_sorted(s.samples.begin(), s.samples.end())) r.at("samples").fail("must be sorted");
    for (double t : s.samples)
      if (t < 0.0 || t > s.T) r.at("samples").fail("sample times must lie in [0, T]");
  } else {
    s.samples = {0.0};
    if (s.T > 0.0) s.samples.push_back(s.T);
  }
  if (r.has("eps")) s.eps = r.at("eps").number();
  if (!(s.eps > 0.0)) r.fail("eps must be positive");
  if (r.has("grid_m1")) s.grid_m1 = positive(r.at("grid_m1"), 3);
  if (r.has("block_L")) s.block_L = positive(r.at("block_L"), 0);
}

void parse_converge(const Reader& r, ConvergeConfig& c) {
  r.only({"t", "eps", "grid_m1"});
  if (r.has("t")) c.t = r.at("t").number();
  if (!(c.t >= 0.0)) r.fail("t must be nonnegative");
  if (r.has("eps")) c.eps = r.at("eps").number();
  if (!(c.eps > 0.0)) r.fail("eps must be positive");
  if (r.has("grid_m1")) c.grid_m1 = positive(r.at("grid_m1"), 3);
}

void parse_exact(const Reader& r, ExactConfig& e, int dim) {
  r.only({"N", "wall", "lambda", "dynamics"});
  if (r.has("N")) e.N = positive(r.at("N"), 2);
  if (r.has("wall")) e.wall = wall_of(r.at("wall"));
  if (r.has("lambda")) {
    e.lambda = numbers(r.at("lambda"));
    if (static_cast<int>(e.lambda.size()) != dim + 1) r.at("lambda").fail("expected dim + 1 entries");
  } else {
    e.lambda.assign(static_cast<std::size_t>(dim + 1), 0.0);
  }
  if (r.has("dynamics")) e.dynamics = dynamics_of(r.at("dynamics"), e.dynamics);
}

void parse_output(const Reader& r, OutputConfig& o) {
  r.only({"directory", "formats"});
  if (r.has("directory")) o.directory = r.at("directory").string();
  if (r.has("formats")) {
    const Reader f = r.at("formats");
    o.csv = o.binary = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto s = f.at(i).string();
      if (s == "csv") o.csv = true;
      else if (s == "binary") o.binary = true;
      else f.at(i).fail("expected \"csv\" or \"binary\"");
    }
  }
}

// Checks every module precondition that does not need a run.
void cross_validate(const ExperimentConfig& c) {
  const auto vs = c.velocity_set();
  try {
    c.reservoirs().validate(vs, c.model.dim);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config error at /model/alpha|beta: ") + e.what());
  }
  const Grid grid = c.hydro_grid();
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const auto u = grid.position(n);
    for (std::size_t v = 0; v < vs.size(); ++v) {
      const double th = c.model.initial[v]({u[0], u[1], u[2]});
      if (!(th > 0.0 && th < 1.0))
        throw ConfigError("config error at /model/initial/" + std::to_string(v) +
                          ": occupation leaves (0,1) at u1 = " + std::to_string(u[0]));
    }
  }
  if (c.hydro.dt > max_stable_dt(grid) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "config error at /hydro/dt: " << c.hydro.dt << " exceeds the stability limit "
       << max_stable_dt(grid);
    throw ConfigError(os.str());
  }
  for (const auto& [path, eps, m1] : {std::tuple{"/simulate", c.simulate.eps, c.simulate.grid_m1},
                                      std::tuple{"/converge", c.converge.eps, c.converge.grid_m1}}) {
    const Grid g(c.model.dim, m1, c.hydro.m);
    for (int j = 0; j < c.model.dim; ++j)
      if (g.spacing(j) > 0.5 * eps + 1e-15)
        throw ConfigError(std::string("config error at ") + path + ": grid spacing exceeds eps/2");
  }
}

}  // namespace

VelocitySet ExperimentConfig::velocity_set() const { return VelocitySet::create(model.dim, model.velocities); }

ReservoirProfiles ExperimentConfig::reservoirs() const {
  ReservoirProfiles r;
  auto wrap = [](const Expression& e) {
    return [e](std::span<const double> t) {
      std::array<double, 3> u{};
      for (std::size_t j = 0; j < t.size(); ++j) u[j + 1] = t[j];
      return e(u);
    };
  };
  for (const auto& e : model.alpha) r.alpha.push_back(wrap(e));
  for (const auto& e : model.beta) r.beta.push_back(wrap(e));
  return r;
}

BoundaryData ExperimentConfig::boundary() const {
  return BoundaryData::from_reservoirs(reservoirs(), velocity_set());
}

ConservedProfile ExperimentConfig::gamma() const {
  const auto vs = velocity_set();
  const auto theta = model.initial;
  return [vs, theta](const std::array<double, kMaxDim>& u) {
    StateVec s = StateVec::Zero(vs.dim() + 1);
    for (std::size_t v = 0; v < vs.size(); ++v) s += theta[v]({u[0], u[1], u[2]}) * vs.lifted(v);
    return s;
  };
}

Control ExperimentConfig::control() const {
  Control H(model.dim, hydro.T > 0.0 ? hydro.T : 1.0);
  for (const auto& t : ldp.control) H.add(t.mode, t.coefficient);
  return H;
}

Grid ExperimentConfig::hydro_grid() const { return Grid(model.dim, hydro.m1, hydro.m); }

SolverOptions ExperimentConfig::solver_options() const {
  SolverOptions o;
  const Grid g = hydro_grid();
  o.dt = hydro.dt > 0.0 ? hydro.dt : max_stable_dt(g);
  o.frame_interval = hydro.T / hydro.frames;
  return o;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(canonical.dump()); }

namespace {

ExperimentConfig parse_impl(const json& doc_in, const std::filesystem::path& base,
                            const Overrides& overrides) {
  json doc = doc_in;
  if (overrides.seed) doc["model"]["seed"] = *overrides.seed;
  if (overrides.replicas) doc["model"]["replicas"] = *overrides.replicas;
  if (overrides.out) doc["output"]["directory"] = *overrides.out;
  const Reader root(doc, "");
  root.only({"model", "hydro", "ldp", "simulate", "converge", "exact", "output"});
  if (!root.has("model")) root.fail("missing key model");
  ExperimentConfig c;
  parse_model(root.at("model"), c.model, base);
  if (root.has("hydro")) parse_hydro(root.at("hydro"), c.hydro);
  if (root.has("ldp")) parse_ldp(root.at("ldp"), c.ldp, c.model.dim);
  if (root.has("simulate")) parse_simulate(root.at("simulate"), c.simulate);
  else c.simulate.samples = {0.0};
  if (root.has("converge")) parse_converge(root.at("converge"), c.converge);
  if (root.has("exact")) parse_exact(root.at("exact"), c.exact, c.model.dim);
  else c.exact.lambda.assign(static_cast<std::size_t>(c.model.dim + 1), 0.0);
  if (root.has("output")) parse_output(root.at("output"), c.output);
  cross_validate(c);
  // The output directory does not change results, so it stays out of the hash.
  c.canonical = doc;
  if (c.canonical.contains("output")) {
    c.canonical["output"].erase("directory");
    if (c.canonical["output"].empty()) c.canonical.erase("output");
  }
  return c;
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const Overrides& overrides) {
  return parse_impl(doc, std::filesystem::current_path(), overrides);
}

ExperimentConfig load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file " + path + ": top level must be an object");
  auto base = std::filesystem::path(path).parent_path();
  if (base.empty()) base = ".";
  return parse_impl(doc, base, overrides);
}

}  // namespace bdex::cli
