#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bdex/dynamics.hpp"
#include "bdex/hydro.hpp"
#include "bdex/ldp.hpp"
#include "bdex_cli/expression.hpp"

namespace bdex::cli {

struct ModelConfig {
  int dim = 1;
  std::vector<std::vector<double>> velocities;
  /// Reservoir densities α_v, β_v as expressions in the transverse u2, u3.
  std::vector<Expression> alpha;
  std::vector<Expression> beta;
  /// Initial per-velocity occupation θ_v(u); γ = Σ_v θ_v ṽ.
  std::vector<Expression> initial;
  std::vector<int> N;
  std::uint64_t seed = 1;
  int replicas = 1;
  Wall wall = Wall::Reservoir;
  DynamicsOptions dynamics{};
};

struct HydroConfig {
  int m1 = 129;
  int m = 16;
  /// 0 selects the stability limit h²/(2(d+1)).
  double dt = 0.0;
  double T = 0.5;
  int frames = 400;
  /// Extra solves at 2×, 4×, ... refinement for the self-convergence table.
  int refine_levels = 0;
};

struct ControlTerm {
  Mode mode;
  double coefficient;
};

struct LdpConfig {
  std::vector<std::size_t> basis_sizes{8, 16, 32};
  std::vector<ControlTerm> control;
  int energy_time_modes = 8;
  /// 0 selects (m1 - 1)/2.
  int energy_u1_modes = 0;
};

struct SimulateConfig {
  double T = 0.0;
  std::vector<double> samples;
  double eps = 0.1;
  int grid_m1 = 129;
  int block_L = 1;
};

struct ConvergeConfig {
  double t = 0.25;
  double eps = 0.1;
  int grid_m1 = 129;
};

struct ExactConfig {
  int N = 3;
  Wall wall = Wall::Periodic;
  std::vector<double> lambda;
  DynamicsOptions dynamics{true, false, false};
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool binary = true;
};

struct ExperimentConfig {
  ModelConfig model;
  HydroConfig hydro;
  LdpConfig ldp;
  SimulateConfig simulate;
  ConvergeConfig converge;
  ExactConfig exact;
  OutputConfig output;
  /// Canonical form of the effective configuration (after overrides).
  nlohmann::json canonical;

  VelocitySet velocity_set() const;
  ReservoirProfiles reservoirs() const;
  BoundaryData boundary() const;
  ConservedProfile gamma() const;
  Control control() const;
  Grid hydro_grid() const;
  SolverOptions solver_options() const;
  /// FNV-1a 64 of the canonical JSON text, as 16 hex digits.
  std::string hash() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  std::optional<std::string> out;
};

/// Parses and validates; ConfigError names the JSON pointer of the offending
/// key. Unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& doc, const Overrides& overrides = {});
ExperimentConfig load_config(const std::string& path, const Overrides& overrides = {});

std::string fnv1a_hex(const std::string& text);

}  // namespace bdex::cli
