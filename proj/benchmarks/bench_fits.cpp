#include <random>

#include <benchmark/benchmark.h>

#include "fits/controller.hpp"
#include "fits/sim.hpp"

namespace {

// One FITS tick on the quadrotor geofence at the given N and M.
void BM_FitsTickQuadrotor(benchmark::State& state) {
  const auto sc = fits::scenario_geofencing();
  auto cfg = fits::default_fits_config("geofencing");
  cfg.num_steps = static_cast<int>(state.range(0));
  cfg.num_samples = static_cast<int>(state.range(1));
  const auto s = fits::init_trajectory(sc, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(fits::fits_tick(s, sc, cfg, 0.0));
  state.counters["rows"] = fits::fits_tick(s, sc, cfg, 0.0).diagnostics.num_rows;
}
BENCHMARK(BM_FitsTickQuadrotor)->Args({20, 40})->Args({10, 20})->Args({40, 80})->Unit(benchmark::kMicrosecond);

void BM_FitsTickNavigation(benchmark::State& state) {
  const auto sc = fits::scenario_navigation(fits::generate_layout(fits::kDefaultNavigationSeed));
  const auto cfg = fits::default_fits_config("navigation");
  const auto s = fits::init_trajectory(sc, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(fits::fits_tick(s, sc, cfg, 0.0));
}
BENCHMARK(BM_FitsTickNavigation)->Unit(benchmark::kMicrosecond);

void BM_RolloutQuadrotor(benchmark::State& state) {
  const auto sc = fits::scenario_geofencing();
  const auto cfg = fits::default_fits_config("geofencing");
  const auto s = fits::init_trajectory(sc, cfg);
  const auto grid = cfg.grid();
  for (auto _ : state) benchmark::DoNotOptimize(fits::rollout_with_sensitivity(s, *sc.model, grid));
}
BENCHMARK(BM_RolloutQuadrotor)->Unit(benchmark::kMicrosecond);

// Dense QP of the FITS shape: n variables, 3n inequality rows.
void BM_QpSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m = 3 * n;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const auto rand_mat = [&](int r, int c) {
    Eigen::MatrixXd A(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) A(i, j) = U(rng);
    return A;
  };
  fits::qp::QPProblem p;
  const Eigen::MatrixXd A = rand_mat(n, n);
  p.P = A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  p.q = rand_mat(n, 1);
  p.G = rand_mat(m, n);
  p.b = p.G * rand_mat(n, 1) - 0.5 * rand_mat(m, 1).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(fits::qp::solve(p));
}
BENCHMARK(BM_QpSolve)->Arg(10)->Arg(40)->Arg(80)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
