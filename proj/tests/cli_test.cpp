#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bdex/errors.hpp"
#include "bdex_cli/commands.hpp"

using namespace bdex;
using namespace bdex::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const double kPi = std::acos(-1.0);

json small_config() {
  return json::parse(R"({
    "model": {
      "dim": 1,
      "velocities": [[0.5], [-0.5]],
      "alpha": [0.3, 0.4],
      "beta": [0.6, 0.5],
      "initial": ["0.3 + 0.3*u1", "0.4 + 0.1*u1"],
      "N": [8, 12],
      "replicas": 2
    },
    "hydro": {"m1": 17, "T": 0.05, "frames": 10},
    "ldp": {"basis_sizes": [2, 4, 8]},
    "simulate": {"T": 0.02, "samples": [0.0, 0.02], "eps": 0.2, "grid_m1": 21},
    "converge": {"t": 0.02, "eps": 0.2, "grid_m1": 21}
  })");
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bdex_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const auto p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "bdex");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Expression, EvaluatesWithPrecedence) {
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 2*3")({}), 7.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2^3^2")({}), 512.0);
  EXPECT_DOUBLE_EQ(Expression::parse("-2^2")({}), -4.0);
  EXPECT_DOUBLE_EQ(Expression::parse("(1 - 4)/2")({}), -1.5);
  EXPECT_DOUBLE_EQ(Expression::parse("1e-1 + .5")({}), 0.6);
  EXPECT_NEAR(Expression::parse("0.3 + 0.1*sin(2*pi*u2)")({0, 0.25, 0}), 0.4, 1e-15);
  EXPECT_NEAR(Expression::parse("exp(u1) * sqrt(u3) - cos(0)")({1.0, 0, 4.0}), 2 * std::exp(1.0) - 1, 1e-14);
}

TEST(Expression, TracksVariables) {
  const auto e = Expression::parse("u2 + sin(pi*u3)");
  EXPECT_FALSE(e.uses(0));
  EXPECT_TRUE(e.uses(1));
  EXPECT_TRUE(e.uses(2));
  EXPECT_EQ(e.text(), "u2 + sin(pi*u3)");
}

TEST(Expression, ReportsColumnOfError) {
  for (const char* bad : {"1 +", "sin 2", "u4", "(1", "2 ** 3", "foo(1)", ""}) {
    try {
      Expression::parse(bad);
      ADD_FAILURE() << bad;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("column"), std::string::npos) << e.what();
    }
  }
}

TEST(Config, ParsesDefaults) {
  const auto c = parse_config(small_config());
  EXPECT_EQ(c.model.seed, 1u);
  EXPECT_EQ(c.model.N, (std::vector<int>{8, 12}));
  EXPECT_EQ(c.velocity_set().size(), 2u);
  EXPECT_DOUBLE_EQ(c.solver_options().dt, max_stable_dt(Grid(1, 17)));
  const auto g = c.gamma()({0.5, 0, 0});
  EXPECT_NEAR(g[0], 0.45 + 0.45, 1e-15);
  EXPECT_NEAR(g[1], 0.5 * (0.45 - 0.45), 1e-15);
  EXPECT_EQ(c.hash().size(), 16u);
}

TEST(Config, UnknownKeysNameTheirPath) {
  auto j = small_config();
  j["model"]["alhpa"] = 1;
  EXPECT_NE(config_error(j).find("/model/alhpa"), std::string::npos);
  j = small_config();
  j["extra"] = true;
  EXPECT_NE(config_error(j).find("/extra"), std::string::npos);
}

TEST(Config, RejectsBadValues) {
  auto j = small_config();
  j["model"]["alpha"] = {0.3};
  EXPECT_NE(config_error(j).find("/model/alpha"), std::string::npos);
  j = small_config();
  j["model"]["beta"][0] = 1.2;
  EXPECT_FALSE(config_error(j).empty());
  j = small_config();
  j["model"]["alpha"][0] = "0.3 + u1";
  EXPECT_NE(config_error(j).find("u1"), std::string::npos);
  j = small_config();
  j["model"]["initial"][0] = "1.5*u1";
  EXPECT_NE(config_error(j).find("/model/initial/0"), std::string::npos);
  j = small_config();
  j["model"]["velocities"] = {{1.5}, {-1.5}};
  EXPECT_NE(config_error(j).find("/model/velocities"), std::string::npos);
  j = small_config();
  j["model"]["N"] = {8, 1};
  EXPECT_NE(config_error(j).find("/model/N/1"), std::string::npos);
  j = small_config();
  j["model"]["seed"] = "one";
  EXPECT_NE(config_error(j).find("/model/seed"), std::string::npos);
  j = small_config();
  j["simulate"]["samples"] = {0.0, 1.0};
  EXPECT_NE(config_error(j).find("/simulate/samples"), std::string::npos);
  j = small_config();
  j["simulate"]["grid_m1"] = 5;
  EXPECT_NE(config_error(j).find("/simulate"), std::string::npos);
}

TEST(Config, UnstableStepIsRejectedBeforeRunning) {
  auto j = small_config();
  j["hydro"]["dt"] = 1.0;
  EXPECT_NE(config_error(j).find("/hydro/dt"), std::string::npos);
}

TEST(Config, VelocityFileIsRelativeToConfig) {
  const auto dir = scratch("velocity_file");
  std::ofstream(dir / "v.txt") << "# pair\n0.25\n-0.25\n";
  auto j = small_config();
  j["model"].erase("velocities");
  j["model"]["velocity_file"] = "v.txt";
  const auto c = load_config(write_config(dir, j).string());
  EXPECT_DOUBLE_EQ(c.velocity_set().component(0, 0), 0.25);
}

TEST(Config, HashFollowsContentNotOutputDirectory) {
  const auto a = parse_config(small_config(), {std::nullopt, std::nullopt, std::string("x")});
  const auto b = parse_config(small_config(), {std::nullopt, std::nullopt, std::string("y")});
  const auto c = parse_config(small_config(), {std::uint64_t{9}, std::nullopt, std::nullopt});
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(c.model.seed, 9u);
}

TEST(Config, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit_codes");
  const auto cfg = write_config(dir, small_config()).string();
  EXPECT_EQ(run_cli({"exact", "--config", cfg, "--out", (dir / "o").string(), "--quiet"}), 0);
  EXPECT_EQ(run_cli({"bogus", "--config", cfg}), 2);
  EXPECT_EQ(run_cli({"exact"}), 2);
  EXPECT_EQ(run_cli({"exact", "--config", (dir / "missing.json").string()}), 2);
  auto j = small_config();
  j["exact"] = {{"N", 13}};
  std::string err;
  EXPECT_EQ(run_cli({"exact", "--config", write_config(dir, j).string(), "--quiet"}, &err), 2);
  EXPECT_NE(err.find("error"), std::string::npos);
}

TEST(Cli, NumericalFailureExitCode) {
  const auto dir = scratch("numerical");
  auto j = small_config();
  // Strong control drives the density out of the admissible set.
  j["ldp"]["control"] = {{{"component", 0}, {"time", 0}, {"m", 1}, {"coefficient", 400.0}}};
  j["hydro"]["T"] = 0.2;
  EXPECT_EQ(run_cli({"rate", "--config", write_config(dir, j).string(), "--out", (dir / "o").string(), "--quiet"}),
            3);
}

TEST(Cli, SimulateAtTimeZeroWritesOnlyInitialObservation) {
  const auto dir = scratch("t0");
  auto j = small_config();
  j["simulate"] = {{"T", 0.0}, {"eps", 0.2}, {"grid_m1", 21}};
  j["model"]["N"] = 8;
  j["model"]["replicas"] = 1;
  ASSERT_EQ(run_cli({"simulate", "--config", write_config(dir, j).string(), "--out", (dir / "o").string(), "--quiet"}), 0);
  std::istringstream csv(slurp(dir / "o" / "simulate_N8_r0_smoothed.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty() && line[0] != '#' && line[0] != 't') {
      ++rows;
      EXPECT_EQ(line.substr(0, 2), "0,");
    }
  EXPECT_EQ(rows, 21);
}

TEST(Cli, FixedSeedRunsAreByteIdentical) {
  const auto dir = scratch("replay");
  const auto cfg = write_config(dir, small_config()).string();
  ASSERT_EQ(run_cli({"simulate", "--config", cfg, "--out", (dir / "a").string(), "--quiet"}), 0);
  ASSERT_EQ(run_cli({"simulate", "--config", cfg, "--out", (dir / "b").string(), "--quiet", "--threads", "3"}), 0);
  ASSERT_EQ(run_cli({"simulate", "--config", cfg, "--out", (dir / "c").string(), "--quiet", "--seed", "2"}), 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const auto name = e.path().filename();
    if (name.string().rfind("manifest", 0) == 0) continue;
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / name)) << name;
    ++files;
  }
  EXPECT_EQ(files, 8);
  EXPECT_NE(slurp(dir / "a" / "simulate_N12_r1_blocks.csv"), slurp(dir / "c" / "simulate_N12_r1_blocks.csv"));
}

TEST(Cli, TablesCarryHashAndUnits) {
  const auto dir = scratch("headers");
  const auto cfg = write_config(dir, small_config()).string();
  const auto out = dir / "o";
  ASSERT_EQ(run_cli({"hydro", "--config", cfg, "--out", out.string(), "--quiet"}), 0);
  ASSERT_EQ(run_cli({"simulate", "--config", cfg, "--out", out.string(), "--quiet"}), 0);
  const auto hash = load_config(cfg).hash();
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.path().extension() != ".csv") continue;
    const auto text = slurp(e.path());
    EXPECT_EQ(text.rfind("# config_hash=" + hash + "\n# units: ", 0), 0u) << e.path();
  }
  const auto manifest = json::parse(slurp(out / "manifest_simulate.json"));
  EXPECT_EQ(manifest["config_hash"], hash);
  EXPECT_EQ(manifest["seed"], 1);
  EXPECT_EQ(manifest["streams"].size(), 4u);
  EXPECT_TRUE(manifest["timings_seconds"].contains("simulate"));
  EXPECT_FALSE(fs::exists(out / "manifest_simulate.json.tmp"));
}

TEST(Cli, ConstantDataGivesConstantTrajectory) {
  const auto dir = scratch("constant");
  auto j = small_config();
  j["model"]["alpha"] = {0.3, 0.4};
  j["model"]["beta"] = {0.3, 0.4};
  j["model"]["initial"] = {0.3, 0.4};
  const auto c = load_config(write_config(dir, j).string(), {std::nullopt, std::nullopt, (dir / "o").string()});
  cmd_hydro(c, {});
  std::ifstream in(dir / "o" / "hydro_trajectory.bin", std::ios::binary);
  const auto traj = read_binary(in);
  for (const auto& f : traj.frames) {
    EXPECT_LE((f.row(0).array() - 0.7).abs().maxCoeff(), 1e-13);
    EXPECT_LE((f.row(1).array() + 0.05).abs().maxCoeff(), 1e-13);
  }
}

TEST(Cli, RefinementTableShowsSecondOrder) {
  const auto dir = scratch("refine");
  auto j = small_config();
  j["hydro"]["refine_levels"] = 2;
  j["hydro"]["m1"] = 33;
  ASSERT_EQ(run_cli({"hydro", "--config", write_config(dir, j).string(), "--out", (dir / "o").string(), "--quiet"}), 0);
  std::istringstream csv(slurp(dir / "o" / "hydro_refinement.csv"));
  std::string line;
  std::vector<double> orders;
  while (std::getline(csv, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'l') continue;
    const auto comma = line.rfind(',');
    const auto tail = line.substr(comma + 1);
    if (tail != "nan") orders.push_back(std::stod(tail));
  }
  ASSERT_EQ(orders.size(), 2u);
  for (double o : orders) EXPECT_NEAR(o, 2.0, 0.2);
}

TEST(Cli, ConvergeNeedsTwoSizes) {
  const auto dir = scratch("converge_one");
  auto j = small_config();
  j["model"]["N"] = {16};
  std::string err;
  EXPECT_EQ(run_cli({"converge", "--config", write_config(dir, j).string(), "--out", (dir / "o").string(), "--quiet"}, &err), 2);
  EXPECT_NE(err.find("/model/N"), std::string::npos);
}

TEST(Cli, ConvergeTableHasEveryRow) {
  const auto c = parse_config(small_config(), {std::nullopt, std::nullopt, (scratch("converge") / "o").string()});
  const auto rows = convergence_table(c, {});
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.replicas, 2);
    EXPECT_GT(r.error.minCoeff(), 0.0);
    EXPECT_GT(r.initial_error.minCoeff(), 0.0);
  }
}

TEST(Cli, RateSweepIsMonotone) {
  const auto dir = scratch("rate");
  auto j = small_config();
  j["ldp"]["control"] = {{{"component", 1}, {"time", 0}, {"m", 1}, {"coefficient", 0.05}}};
  ASSERT_EQ(run_cli({"rate", "--config", write_config(dir, j).string(), "--out", (dir / "o").string(), "--quiet"}), 0);
  std::istringstream csv(slurp(dir / "o" / "rate_sweep.csv"));
  std::string line;
  std::vector<double> est;
  while (std::getline(csv, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'b') continue;
    est.push_back(std::stod(line.substr(line.find(',') + 1)));
  }
  ASSERT_EQ(est.size(), 3u);
  EXPECT_LE(est[0], est[1] * (1 + 1e-9));
  EXPECT_LE(est[1], est[2] * (1 + 1e-9));
  EXPECT_NE(slurp(dir / "o" / "rate_control.txt").find("gap = "), std::string::npos);
}

TEST(Cli, ExactReportOnPeriodicPair) {
  const auto dir = scratch("exact");
  auto j = small_config();
  j["exact"] = {{"N", 3}, {"wall", "periodic"}, {"lambda", {0.4, -1.0}},
                {"dynamics", {{"exclusion", true}, {"collisions", false}, {"boundary", false}}}};
  const auto c = load_config(write_config(dir, j).string(), {std::nullopt, std::nullopt, (dir / "o").string()});
  const auto m = cmd_exact(c, {});
  EXPECT_EQ(m.summary["states"], 16);
  EXPECT_LE(m.summary["invariance_residual"].get<double>(), 1e-12);
  EXPECT_EQ(m.summary["row_sum_residual"].get<double>(), 0.0);
}

// With α = β and a matching product initial state the law is stationary,
// so the mean block profile is flat at α₊ + α₋.
TEST(Cli, MatchedReservoirsGiveFlatMeanProfile) {
  const auto dir = scratch("matched");
  auto j = small_config();
  j["model"]["alpha"] = {0.3, 0.6};
  j["model"]["beta"] = {0.3, 0.6};
  j["model"]["initial"] = {0.3, 0.6};
  j["model"]["N"] = 24;
  j["model"]["replicas"] = 40;
  j["simulate"] = {{"T", 0.1}, {"samples", {0.1}}, {"eps", 0.2}, {"grid_m1", 21}, {"block_L", 2}};
  ASSERT_EQ(run_cli({"simulate", "--config", write_config(dir, j).string(), "--out", (dir / "o").string(), "--quiet"}), 0);
  std::map<std::string, std::pair<double, int>> sums;
  for (int r = 0; r < 40; ++r) {
    std::istringstream csv(slurp(dir / "o" / ("simulate_N24_r" + std::to_string(r) + "_blocks.csv")));
    std::string line;
    while (std::getline(csv, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 't') continue;
      std::stringstream row(line);
      std::string t, u, rho;
      std::getline(row, t, ',');
      std::getline(row, u, ',');
      std::getline(row, rho, ',');
      sums[u].first += std::stod(rho);
      ++sums[u].second;
    }
  }
  ASSERT_EQ(sums.size(), 19u);
  const double sigma = std::sqrt((0.3 * 0.7 + 0.6 * 0.4) / 5.0 / 40.0);
  for (const auto& [u, s] : sums) EXPECT_NEAR(s.first / s.second, 0.9, 4 * sigma) << u;
}

TEST(Cli, ReferenceConfigLoads) {
  const auto c = load_config(std::string(BDEX_SOURCE_DIR) + "/configs/reference.json");
  EXPECT_EQ(c.model.N, (std::vector<int>{16, 32, 64}));
  EXPECT_EQ(c.model.replicas, 8);
  EXPECT_NEAR(c.gamma()({0.5, 0, 0})[0], 0.45 + 0.45 + 0.3, 1e-15);
}
