#include "bdex_cli/commands.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "bdex/empirical.hpp"
#include "bdex/errors.hpp"
#include "bdex/sampling.hpp"

#ifndef BDEX_VERSION
#define BDEX_VERSION "unknown"
#endif

namespace bdex::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void say(const RunOptions& o, const std::string& msg) {
  if (o.log) *o.log << msg << '\n';
}

// Runs f(0..jobs-1) on a bounded pool. Results come back in job order and
// the lowest-index failure is rethrown, so the outcome never depends on
// scheduling.
template <class F>
auto parallel_map(std::size_t jobs, int threads, F f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<std::optional<R>> slots(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs;) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t extra =
      std::min<std::size_t>(jobs, static_cast<std::size_t>(std::max(1, threads))) - (jobs ? 1 : 0);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < extra; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(jobs);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string format(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

fs::path output_dir(const ExperimentConfig& c) {
  fs::path dir = c.output.directory;
  fs::create_directories(dir);
  return dir;
}

void emit(RunManifest& m, const fs::path& path, const std::string& content) {
  write_atomic(path, content);
  m.outputs.push_back(path.filename().string());
}

RunManifest start_manifest(const std::string& command, const ExperimentConfig& c) {
  RunManifest m;
  m.command = command;
  m.version = BDEX_VERSION;
  m.config_hash = c.hash();
  m.config = c.canonical;
  m.seed = c.model.seed;
  return m;
}

void finish(RunManifest& m, const ExperimentConfig& c) {
  write_atomic(output_dir(c) / ("manifest_" + m.command + ".json"), m.to_json().dump(2) + "\n");
}

Model make_model(const ExperimentConfig& c, int N) {
  return Model(Lattice(N, c.model.dim, c.model.wall), c.velocity_set(), c.reservoirs(),
               c.model.dynamics);
}

std::string header_columns(int dim, const char* lead, const char* prefix) {
  std::string s = lead;
  for (int j = 0; j < dim; ++j) s += ",u" + std::to_string(j + 1);
  s += ",rho";
  for (int k = 1; k <= dim; ++k) s += std::string(",") + prefix + std::to_string(k);
  return s + "\n";
}

std::string smoothed_columns(int dim) {
  std::string s = "t";
  for (int j = 0; j < dim; ++j) s += ",u" + std::to_string(j + 1);
  for (int k = 0; k <= dim; ++k) s += ",pi" + std::to_string(k);
  return s + "\n";
}

SolverOptions options_for(const ExperimentConfig& c, const Grid& grid, double frame_interval) {
  // A configured step is kept at the same ratio to the stability limit.
  SolverOptions o;
  o.dt = max_stable_dt(grid);
  if (c.hydro.dt > 0.0) o.dt *= c.hydro.dt / max_stable_dt(c.hydro_grid());
  o.frame_interval = frame_interval;
  return o;
}

// The same box operator for the PDE side as for the particles.
SmoothedField smoothed_pde(const ExperimentConfig& c, const Grid& grid, double t, double eps) {
  Eigen::MatrixXd values;
  if (t > 0.0) {
    const auto traj = solve_hydro(c.gamma(), c.boundary(), c.velocity_set(), t, grid,
                                  options_for(c, grid, t));
    values = traj.frames.back();
  } else {
    values = MacroField::sample(grid, c.gamma()).values;
  }
  return smooth_field(values, grid, eps);
}

}  // namespace

json RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["config"] = config;
  j["seed"] = seed;
  j["stream_rule"] = "Philox4x32-10 key=seed counter-stream=N, split(replica); split(0) initial state, split(1) dynamics";
  j["streams"] = streams;
  j["outputs"] = outputs;
  json t = json::object();
  for (const auto& [k, v] : timings) t[k] = v;
  j["timings_seconds"] = t;
  j["summary"] = summary;
  return j;
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string table_preamble(const ExperimentConfig& c, const std::string& units) {
  return "# config_hash=" + c.hash() + "\n# units: " + units + "\n";
}

Philox replica_stream(std::uint64_t seed, int N, int replica) {
  return Philox(seed, static_cast<std::uint64_t>(N)).split(static_cast<std::uint64_t>(replica));
}

RunManifest cmd_simulate(const ExperimentConfig& c, const RunOptions& options) {
  auto m = start_manifest("simulate", c);
  const auto t0 = Clock::now();
  const auto dir = output_dir(c);
  const Grid grid(c.model.dim, c.simulate.grid_m1, c.hydro.m);
  const auto vs = c.velocity_set();
  const int d = c.model.dim;
  const int L = c.simulate.block_L;

  struct Job {
    int N;
    int replica;
  };
  std::vector<Job> jobs;
  for (int N : c.model.N)
    for (int r = 0; r < c.model.replicas; ++r) jobs.push_back({N, r});

  struct Output {
    std::string smoothed;
    std::string blocks;
    std::uint64_t events;
  };
  const auto results = parallel_map(jobs.size(), options.threads, [&](std::size_t i) {
    const Job job = jobs[i];
    const Model model = make_model(c, job.N);
    Philox stream = replica_stream(c.model.seed, job.N, job.replica);
    Philox init_rng = stream.split(0);
    Configuration eta = sample_local_equilibrium(c.gamma(), model.lattice(), vs, init_rng);
    std::ostringstream smoothed, blocks;
    smoothed.precision(17);
    blocks.precision(17);
    Simulator sim(model, std::move(eta), stream.split(1));
    sim.run(c.simulate.T, c.simulate.samples, [&](double t, const Configuration& state) {
      const auto field = smooth(empirical_measure(state, model.lattice(), vs), c.simulate.eps, grid);
      for (std::size_t n = 0; n < grid.node_count(); ++n) {
        smoothed << t;
        const auto u = grid.position(n);
        for (int j = 0; j < d; ++j) smoothed << ',' << u[j];
        for (int k = 0; k <= d; ++k) smoothed << ',' << field.values(k, static_cast<Eigen::Index>(n));
        smoothed << '\n';
      }
      const auto& lat = model.lattice();
      for (Site x = 0; x < lat.site_count(); ++x) {
        const int x1 = lat.coords(x)[0];
        if (lat.wall() == Wall::Reservoir && (x1 - L < 1 || x1 + L > lat.length())) continue;
        if (lat.wall() == Wall::Periodic && 2 * L + 1 > lat.length()) continue;
        const auto avg = block_average(state, lat, vs, x, L);
        blocks << t;
        const auto u = lat.position(x);
        for (int j = 0; j < d; ++j) blocks << ',' << u[j];
        for (int k = 0; k <= d; ++k) blocks << ',' << avg.values[k];
        blocks << '\n';
      }
    });
    if (options.log) {
      static std::mutex mu;
      std::lock_guard lock(mu);
      *options.log << "simulate N=" << job.N << " replica=" << job.replica << " done\n";
    }
    return Output{smoothed.str(), blocks.str(), sim.counts().total()};
  });
  m.timings.emplace_back("simulate", seconds_since(t0));

  const auto t1 = Clock::now();
  json events = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string tag = "N" + std::to_string(jobs[i].N) + "_r" + std::to_string(jobs[i].replica);
    m.streams.push_back("N=" + std::to_string(jobs[i].N) + " replica=" + std::to_string(jobs[i].replica));
    emit(m, dir / ("simulate_" + tag + "_smoothed.csv"),
         table_preamble(c, "t macroscopic (N^2 x microscopic time); u in [0,1]x T^(d-1); "
                           "pi_k smoothed density per unit volume, eps=" + format(c.simulate.eps)) +
             smoothed_columns(d) + results[i].smoothed);
    emit(m, dir / ("simulate_" + tag + "_blocks.csv"),
         table_preamble(c, "t macroscopic; u = x/N site position; rho,p_k per site averaged over a (2L+1)^d block, L=" +
                               std::to_string(L)) +
             header_columns(d, "t", "p") + results[i].blocks);
    events.push_back(results[i].events);
  }
  m.summary["events"] = events;
  m.timings.emplace_back("write", seconds_since(t1));
  finish(m, c);
  return m;
}

RunManifest cmd_hydro(const ExperimentConfig& c, const RunOptions& options) {
  auto m = start_manifest("hydro", c);
  const auto dir = output_dir(c);
  const auto vs = c.velocity_set();
  const int d = c.model.dim;
  const Grid grid = c.hydro_grid();
  auto t0 = Clock::now();
  say(options, "hydro: solving on m1=" + std::to_string(grid.m1()));
  const auto traj = solve_hydro(c.gamma(), c.boundary(), vs, c.hydro.T, grid, c.solver_options());
  m.timings.emplace_back("solve", seconds_since(t0));
  m.summary["frames"] = traj.frame_count();
  m.summary["dt"] = c.solver_options().dt;

  if (c.output.binary) {
    std::ostringstream bin(std::ios::binary);
    write_binary(bin, traj);
    emit(m, dir / "hydro_trajectory.bin", bin.str());
  }
  if (c.output.csv) {
    std::ostringstream csv;
    write_csv(csv, traj,
              table_preamble(c, "t macroscopic; u in [0,1]x T^(d-1); rho mass density, p_k momentum density"));
    emit(m, dir / "hydro_trajectory.csv", csv.str());
  }

  if (c.hydro.refine_levels > 0) {
    t0 = Clock::now();
    std::vector<Grid> grids{grid};
    std::vector<Eigen::MatrixXd> finals{traj.frames.back()};
    for (int l = 1; l <= c.hydro.refine_levels; ++l) {
      const int f = 1 << l;
      const Grid g(d, (c.hydro.m1 - 1) * f + 1, d > 1 ? c.hydro.m * f : c.hydro.m);
      say(options, "hydro: refinement level " + std::to_string(l) + ", m1=" + std::to_string(g.m1()));
      const auto fine = solve_hydro(c.gamma(), c.boundary(), vs, c.hydro.T, g,
                                    options_for(c, g, c.hydro.T > 0.0 ? c.hydro.T : 0.0));
      grids.push_back(g);
      finals.push_back(fine.frames.back());
    }
    std::ostringstream table;
    table.precision(17);
    table << table_preamble(c, "difference = L1 norm over D of the final frame against the next coarser level, "
                               "sampled on the coarser nodes; order = log2 of successive ratios");
    table << "level,m1,m,dt,component,difference,order\n";
    std::vector<StateVec> diffs;
    for (std::size_t l = 1; l < grids.size(); ++l) {
      const Grid& coarse = grids[l - 1];
      const Grid& fine = grids[l];
      StateVec diff = StateVec::Zero(d + 1);
      for (std::size_t n = 0; n < coarse.node_count(); ++n) {
        const std::size_t t = coarse.transverse(n);
        std::size_t tf = 0, stride = 1;
        for (std::size_t rest = t, j = 1; j < static_cast<std::size_t>(d); ++j) {
          tf += 2 * (rest % static_cast<std::size_t>(coarse.m())) * stride;
          rest /= static_cast<std::size_t>(coarse.m());
          stride *= static_cast<std::size_t>(fine.m());
        }
        const std::size_t nf = fine.node(2 * coarse.i1(n), tf);
        diff += coarse.weight(n) *
                (finals[l].col(static_cast<Eigen::Index>(nf)) - finals[l - 1].col(static_cast<Eigen::Index>(n)))
                    .cwiseAbs();
      }
      diffs.push_back(diff);
      for (int k = 0; k <= d; ++k) {
        table << l << ',' << fine.m1() << ',' << fine.m() << ','
              << options_for(c, fine, c.hydro.T).dt << ',' << k << ',' << diff[k] << ',';
        if (diffs.size() >= 2 && diff[k] > 0.0)
          table << std::log2(diffs[diffs.size() - 2][k] / diff[k]);
        else
          table << "nan";
        table << '\n';
      }
    }
    emit(m, dir / "hydro_refinement.csv", table.str());
    m.timings.emplace_back("refinement", seconds_since(t0));
  }
  finish(m, c);
  return m;
}

std::vector<ConvergenceRow> convergence_table(const ExperimentConfig& c, const RunOptions& options) {
  if (c.model.N.size() < 2)
    throw ConfigError("config error at /model/N: convergence needs at least two lattice sizes");
  const auto vs = c.velocity_set();
  const int d = c.model.dim;
  const Grid grid(d, c.converge.grid_m1, c.hydro.m);
  const double t = c.converge.t;
  const double eps = c.converge.eps;
  say(options, "converge: solving the hydrodynamic equation to t=" + format(t));
  const auto pde_t = smoothed_pde(c, grid, t, eps);
  const auto pde_0 = smoothed_pde(c, grid, 0.0, eps);

  struct Job {
    int N;
    int replica;
  };
  std::vector<Job> jobs;
  for (int N : c.model.N)
    for (int r = 0; r < c.model.replicas; ++r) jobs.push_back({N, r});
  const std::vector<double> samples = t > 0.0 ? std::vector<double>{0.0, t} : std::vector<double>{0.0};
  const auto errors = parallel_map(jobs.size(), options.threads, [&](std::size_t i) {
    const Job job = jobs[i];
    const Model model = make_model(c, job.N);
    Philox stream = replica_stream(c.model.seed, job.N, job.replica);
    Philox init_rng = stream.split(0);
    Configuration eta = sample_local_equilibrium(c.gamma(), model.lattice(), vs, init_rng);
    std::pair<StateVec, StateVec> out{StateVec::Zero(d + 1), StateVec::Zero(d + 1)};
    Simulator sim(model, std::move(eta), stream.split(1));
    sim.run(t, samples, [&](double time, const Configuration& state) {
      const auto field = smooth(empirical_measure(state, model.lattice(), vs), eps, grid);
      if (time == 0.0) out.second = l1_distance(field, pde_0);
      if (time == t) out.first = l1_distance(field, pde_t);
    });
    return out;
  });

  std::vector<ConvergenceRow> rows;
  std::size_t i = 0;
  for (int N : c.model.N) {
    ConvergenceRow row;
    row.N = N;
    row.replicas = c.model.replicas;
    const int R = c.model.replicas;
    StateVec s1 = StateVec::Zero(d + 1), s2 = s1, z1 = s1, z2 = s1;
    for (int r = 0; r < R; ++r, ++i) {
      s1 += errors[i].first;
      s2 += errors[i].first.cwiseAbs2();
      z1 += errors[i].second;
      z2 += errors[i].second.cwiseAbs2();
    }
    auto stderr_of = [R](const StateVec& sum, const StateVec& sq) {
      StateVec mean = sum / R;
      if (R < 2) return StateVec(StateVec::Zero(sum.size()));
      StateVec var = ((sq / R) - mean.cwiseAbs2()).cwiseMax(0.0) * (double(R) / (R - 1));
      return StateVec((var / R).cwiseSqrt());
    };
    row.error = s1 / R;
    row.stderr_error = stderr_of(s1, s2);
    row.initial_error = z1 / R;
    row.stderr_initial = stderr_of(z1, z2);
    rows.push_back(row);
  }
  return rows;
}

RunManifest cmd_converge(const ExperimentConfig& c, const RunOptions& options) {
  auto m = start_manifest("converge", c);
  const auto t0 = Clock::now();
  const auto rows = convergence_table(c, options);
  m.timings.emplace_back("converge", seconds_since(t0));
  for (const auto& r : rows)
    for (int k = 0; k < c.model.replicas; ++k)
      m.streams.push_back("N=" + std::to_string(r.N) + " replica=" + std::to_string(k));
  const int d = c.model.dim;
  std::ostringstream table;
  table.precision(17);
  table << table_preamble(c, "error = L1 over D of smoothed empirical minus smoothed PDE solution at t=" +
                                 format(c.converge.t) + " (macroscopic), eps=" + format(c.converge.eps) +
                                 "; initial_error at t=0; mean and standard error over replicas");
  table << "N,replicas,component,error,stderr,initial_error,initial_stderr\n";
  json summary = json::array();
  for (const auto& r : rows)
    for (int k = 0; k <= d; ++k) {
      table << r.N << ',' << r.replicas << ',' << k << ',' << r.error[k] << ',' << r.stderr_error[k] << ','
            << r.initial_error[k] << ',' << r.stderr_initial[k] << '\n';
    }
  for (int k = 0; k <= d; ++k) {
    json comp;
    comp["component"] = k;
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].error[k] < rows[i - 1].error[k];
    comp["monotone"] = monotone;
    comp["ratio_last_first"] = rows.back().error[k] / rows.front().error[k];
    summary.push_back(comp);
  }
  m.summary["components"] = summary;
  emit(m, output_dir(c) / "converge.csv", table.str());
  finish(m, c);
  return m;
}

RunManifest cmd_rate(const ExperimentConfig& c, const RunOptions& options) {
  if (!(c.hydro.T > 0.0)) throw ConfigError("config error at /hydro/T: the rate needs a positive horizon");
  auto m = start_manifest("rate", c);
  const auto dir = output_dir(c);
  const auto vs = c.velocity_set();
  const Grid grid = c.hydro_grid();
  auto t0 = Clock::now();
  say(options, "rate: solving the hydrodynamic equation");
  const auto traj = solve_hydro(c.gamma(), c.boundary(), vs, c.hydro.T, grid, c.solver_options());
  m.timings.emplace_back("solve", seconds_since(t0));

  t0 = Clock::now();
  const TrajectoryQuadrature quad(traj);
  const Eigen::MatrixXd& gamma = traj.frames.front();
  std::ostringstream table;
  table.precision(17);
  table << table_preamble(c, "estimate = sup over the basis span of the rate functional (dimensionless, per N^d)");
  table << "basis_size,estimate,rcond,regularization\n";
  RateReport last;
  for (std::size_t size : c.ldp.basis_sizes) {
    say(options, "rate: basis size " + std::to_string(size));
    last = rate_estimate(quad, gamma, TestBasis::canonical(c.model.dim, c.hydro.T, size));
    table << size << ',' << last.estimate << ',' << last.rcond << ',' << last.regularization << '\n';
  }
  emit(m, dir / "rate_sweep.csv", table.str());
  m.timings.emplace_back("rate", seconds_since(t0));

  t0 = Clock::now();
  const int u1_modes = c.ldp.energy_u1_modes > 0 ? c.ldp.energy_u1_modes : (grid.m1() - 1) / 2;
  const int nt = c.model.dim > 1 ? std::max(1, c.hydro.m / 4) : 0;
  const double q = energy_Q(traj, ScalarBasis::canonical(c.model.dim, c.ldp.energy_time_modes, u1_modes, nt));
  const double q_hat = field_energy(traj);
  m.timings.emplace_back("energy", seconds_since(t0));

  std::ostringstream report;
  report.precision(17);
  report << "# config_hash=" << c.hash() << "\n# units: dimensionless rate per N^d; energies per unit time integrated over [0,T]\n";
  report << "trajectory = hydrodynamic solution\n";
  write_report(report, last);
  report << "energy_variational = " << q << "\nenergy_gradient = " << q_hat << '\n';
  m.summary["estimate"] = last.estimate;
  m.summary["energy_variational"] = q;
  m.summary["energy_gradient"] = q_hat;

  if (!c.ldp.control.empty()) {
    t0 = Clock::now();
    say(options, "rate: controlled trajectory");
    const auto cost = verify_quadratic_cost(c.gamma(), c.boundary(), vs, c.control(), c.hydro.T, grid,
                                c.solver_options(),
                                TestBasis::canonical(c.model.dim, c.hydro.T, c.ldp.basis_sizes.back()));
    m.timings.emplace_back("controlled", seconds_since(t0));
    std::ostringstream fr;
    fr.precision(17);
    fr << "# config_hash=" << c.hash() << "\n# units: dimensionless rate per N^d\n";
    fr << "lhs = " << cost.lhs << "\nrhs = " << cost.rhs << "\ngap = " << cost.gap << '\n';
    write_report(fr, cost.rate);
    emit(m, dir / "rate_control.txt", fr.str());
    m.summary["control"] = {{"lhs", cost.lhs}, {"rhs", cost.rhs}, {"gap", cost.gap}};
  }
  emit(m, dir / "rate_report.txt", report.str());
  finish(m, c);
  return m;
}

RunManifest cmd_exact(const ExperimentConfig& c, const RunOptions& options) {
  auto m = start_manifest("exact", c);
  const auto t0 = Clock::now();
  const auto vs = c.velocity_set();
  const Model model(Lattice(c.exact.N, c.model.dim, c.exact.wall), vs, c.reservoirs(), c.exact.dynamics);
  say(options, "exact: assembling the generator");
  const auto gen = assemble_exact_generator(model);
  ChemicalPotential lambda{StateVec::Map(c.exact.lambda.data(), static_cast<Eigen::Index>(c.exact.lambda.size()))};
  const auto mu = product_measure_weights(model, lambda);
  const auto left = gen.left_apply(mu);
  double invariance = 0.0;
  for (double x : left) invariance = std::max(invariance, std::abs(x));
  const auto db = detailed_balance(gen, mu);
  m.timings.emplace_back("exact", seconds_since(t0));

  std::ostringstream r;
  r.precision(17);
  r << "# config_hash=" << c.hash() << "\n# units: generator entries per unit macroscopic time (N^2 x microscopic)\n";
  r << "states = " << gen.state_count() << '\n';
  r << "sites = " << model.lattice().site_count() << '\n';
  r << "wall = " << (c.exact.wall == Wall::Periodic ? "periodic" : "reservoir") << '\n';
  r << "exclusion = " << c.exact.dynamics.exclusion << "\ncollisions = " << c.exact.dynamics.collisions
    << "\nboundary = " << c.exact.dynamics.boundary << '\n';
  r << "row_sum_residual = " << gen.row_sum_residual() << '\n';
  r << "invariance_residual = " << invariance << '\n';
  r << "detailed_balance_transitions = " << db.transitions << '\n';
  r << "detailed_balance_max_violation = " << db.max_violation << '\n';
  m.summary["states"] = gen.state_count();
  m.summary["row_sum_residual"] = gen.row_sum_residual();
  m.summary["invariance_residual"] = invariance;
  m.summary["detailed_balance_max_violation"] = db.max_violation;
  emit(m, output_dir(c) / "exact_report.txt", r.str());
  finish(m, c);
  return m;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Boundary-driven exclusion process with velocities: experiments"};
  app.set_version_flag("--version", std::string(BDEX_VERSION));
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  std::optional<std::string> out_dir;
  int threads = 1;
  bool quiet = false;
  app.add_option("--config", config_path, "Experiment configuration (JSON)")->required();
  app.add_option("--seed", seed, "Override model.seed");
  app.add_option("--out", out_dir, "Override output.directory");
  app.add_option("--replicas", replicas, "Override model.replicas")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "Worker threads for replicas")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "No progress messages");
  app.require_subcommand(1);
  app.fallthrough();
  auto* simulate = app.add_subcommand("simulate", "Particle system observations");
  auto* hydro = app.add_subcommand("hydro", "Hydrodynamic equation trajectory");
  auto* converge = app.add_subcommand("converge", "Particles against the hydrodynamic equation");
  auto* rate = app.add_subcommand("rate", "Rate functional estimates");
  auto* exact = app.add_subcommand("exact", "Exact generator checks on a tiny lattice");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto config = load_config(config_path, Overrides{seed, replicas, out_dir});
    RunOptions options{threads, quiet ? nullptr : &err};
    RunManifest m;
    if (simulate->parsed()) m = cmd_simulate(config, options);
    else if (hydro->parsed()) m = cmd_hydro(config, options);
    else if (converge->parsed()) m = cmd_converge(config, options);
    else if (rate->parsed()) m = cmd_rate(config, options);
    else if (exact->parsed()) m = cmd_exact(config, options);
    out << m.summary.dump() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const SizeError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace bdex::cli
