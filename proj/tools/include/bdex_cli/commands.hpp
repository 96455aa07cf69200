#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bdex_cli/config.hpp"

namespace bdex::cli {

struct RunOptions {
  int threads = 1;
  /// Progress messages; null silences them.
  std::ostream* log = nullptr;
};

struct RunManifest {
  std::string command;
  std::string version;
  std::string config_hash;
  nlohmann::json config;
  std::uint64_t seed = 0;
  /// Stream identities actually used, as "N=<n> replica=<r>".
  std::vector<std::string> streams;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, double>> timings;
  /// Headline numbers of the run (command specific).
  nlohmann::json summary = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Writes `content` to a sibling temporary and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Two comment lines naming the config hash and the units, for every table.
std::string table_preamble(const ExperimentConfig& config, const std::string& units);

/// Stream for replica r at scale N: Philox(seed, N).split(r). Its split(0)
/// draws the initial state, split(1) drives the dynamics.
Philox replica_stream(std::uint64_t seed, int N, int replica);

struct ConvergenceRow {
  int N = 0;
  int replicas = 0;
  /// Mean and standard error over replicas, per component, at t and at 0.
  StateVec error;
  StateVec stderr_error;
  StateVec initial_error;
  StateVec stderr_initial;
};

/// L¹ distance between the smoothed empirical field and the smoothed PDE
/// solution at converge.t, for every N of the model block.
std::vector<ConvergenceRow> convergence_table(const ExperimentConfig& config,
                                              const RunOptions& options);

RunManifest cmd_simulate(const ExperimentConfig& config, const RunOptions& options);
RunManifest cmd_hydro(const ExperimentConfig& config, const RunOptions& options);
RunManifest cmd_converge(const ExperimentConfig& config, const RunOptions& options);
RunManifest cmd_rate(const ExperimentConfig& config, const RunOptions& options);
RunManifest cmd_exact(const ExperimentConfig& config, const RunOptions& options);

/// Full command line entry point. Returns 0 on success, 2 on configuration
/// errors, 3 on numerical failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bdex::cli
