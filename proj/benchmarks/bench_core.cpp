#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "photongen/device.hpp"
#include "photongen/shaping.hpp"
#include "photongen/spectroscopy.hpp"
#include "photongen/transmon_dynamics.hpp"

using namespace photongen;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void BM_EmissionRate(benchmark::State& state) {
  const Device d = paper2017_device();
  double phi = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(d.emission_rate(phi));
    phi += 1e-3;
  }
}
BENCHMARK(BM_EmissionRate);

void BM_LindbladStep(benchmark::State& state) {
  const Device d = paper2017_device();
  TransmonParams p = d.transmon;
  p.levels = static_cast<int>(state.range(0));
  Controls c;
  c.gamma_rad = d.emission_rate(0.0);
  c.drive.rabi = kTwoPi * 10e6;
  const ControlFn controls = [c](double) { return c; };
  const double dt = max_stable_step(p, c);
  DensityMatrix rho = fock_state(p.levels, 1);
  double t = 0.0;
  for (auto _ : state) {
    rho = lindblad_step(rho, p, controls, t, dt);
    t += dt;
  }
  benchmark::DoNotOptimize(rho);
}
BENCHMARK(BM_LindbladStep)->Arg(2)->Arg(3)->Arg(6);

void BM_Simulate1us(benchmark::State& state) {
  const Device d = paper2017_device();
  Controls c;
  c.gamma_rad = d.emission_rate(0.0);
  const ControlFn controls = [c](double) { return c; };
  SimulationOptions o;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(d.transmon, controls, fock_state(d.transmon.levels, 1), 0.0, 1e-6, o));
  }
}
BENCHMARK(BM_Simulate1us)->Unit(benchmark::kMillisecond);

void BM_FitTrace(benchmark::State& state) {
  const Device d = paper2017_device();
  std::vector<double> grid;
  for (int k = 0; k < 201; ++k) grid.push_back(kTwoPi * (-10e6 + 1e5 * k));
  const auto trace = synthesize_trace(d, FluxBias{0.0}, grid, 0.01, 7);
  for (auto _ : state) benchmark::DoNotOptimize(fit_trace(trace));
}
BENCHMARK(BM_FitTrace)->Unit(benchmark::kMicrosecond);

void BM_FluxForRate(benchmark::State& state) {
  const Device d = paper2017_device();
  const BranchBounds b = branch_bounds(d);
  double f = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(flux_for_rate(d, f * b.peak_rate, b));
    f = f > 0.98 ? 0.01 : f + 0.01;
  }
}
BENCHMARK(BM_FluxForRate);

void BM_FitFluxCurve(benchmark::State& state) {
  const Device d = paper2017_device();
  std::vector<double> grid;
  for (int k = 0; k < 1001; ++k) grid.push_back(k / 1001.0);
  const auto points = synthetic_flux_curve(d, grid, 0.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_flux_curve(points, d));
}
BENCHMARK(BM_FitFluxCurve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
