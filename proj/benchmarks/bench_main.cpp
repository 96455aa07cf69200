#include <benchmark/benchmark.h>

#include <cmath>

#include "bdex/dynamics.hpp"
#include "bdex/hydro.hpp"
#include "bdex/ldp.hpp"
#include "bdex/sampling.hpp"

using namespace bdex;

namespace {

const double kPi = std::acos(-1.0);

ConservedProfile reference_gamma() {
  return [](const std::array<double, kMaxDim>& u) {
    const double bump = 0.15 * std::sin(kPi * u[0]);
    const double tp = 0.3 * (1 - u[0]) + 0.6 * u[0] + bump, tm = 0.4 * (1 - u[0]) + 0.5 * u[0] + bump;
    StateVec s(2);
    s << tp + tm, 0.5 * (tp - tm);
    return s;
  };
}

FieldTrajectory reference_solution(int m1, double T, int frames) {
  const auto vs = VelocitySet::symmetric_pair(0.5);
  const Grid grid(1, m1);
  SolverOptions o;
  o.dt = max_stable_dt(grid);
  o.frame_interval = T / frames;
  return solve_hydro(reference_gamma(),
                     BoundaryData::from_reservoirs(ReservoirProfiles::constant({0.3, 0.4}, {0.6, 0.5}), vs),
                     vs, T, grid, o);
}

// Events per second of the kinetic Monte Carlo step, by system size.
void BM_SimulatorStep(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const auto vs = d == 1 ? VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}})
                         : VelocitySet::create(2, {{0.5, 0}, {-0.5, 0}, {0, 0.5}, {0, -0.5}});
  const Model model(Lattice(N, d), vs, ReservoirProfiles::constant({.3, .3, .3, .3}, {.6, .6, .6, .6}));
  Philox rng(11);
  StateVec lambda = StateVec::Zero(d + 1);
  auto init = rng.split(0);
  Simulator sim(model, sample_product_state({lambda}, model.lattice(), vs, init), rng.split(1));
  for (auto _ : state) benchmark::DoNotOptimize(sim.step());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulatorStep)->Args({64, 1})->Args({1024, 1})->Args({32, 2})->Args({128, 2});

// One horizon solve; the step count grows like m1².
void BM_HydroSolve(benchmark::State& state) {
  const int m1 = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reference_solution(m1, 0.05, 10));
}
BENCHMARK(BM_HydroSolve)->Arg(33)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

// Assembly and solve of the quadratic program for the rate estimate.
void BM_RateEstimate(benchmark::State& state) {
  const auto traj = reference_solution(129, 0.5, 100);
  const TrajectoryQuadrature quad(traj);
  const auto basis = TestBasis::canonical(1, traj.horizon(), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rate_estimate(quad, traj.frames.front(), basis));
}
BENCHMARK(BM_RateEstimate)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TrajectoryQuadrature(benchmark::State& state) {
  const auto traj = reference_solution(static_cast<int>(state.range(0)), 0.5, 100);
  for (auto _ : state) benchmark::DoNotOptimize(TrajectoryQuadrature(traj));
}
BENCHMARK(BM_TrajectoryQuadrature)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
