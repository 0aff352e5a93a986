#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "photongen/device.hpp"
#include "photongen/errors.hpp"
#include "photongen/spectroscopy.hpp"

using namespace photongen;

namespace {

constexpr double kTwoPi = 2.0 * oracle::pi;

std::vector<double> period_grid(int n) {
  std::vector<double> f(n);
  for (int k = 0; k < n; ++k) f[k] = static_cast<double>(k) / n;
  return f;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

void expect_params_within(const FitResult& fit, const CurveParams& truth, double rel) {
  EXPECT_NEAR(fit.value("ic1") / truth.ic1, 1.0, rel);
  EXPECT_NEAR(fit.value("ic2") / truth.ic2, 1.0, rel);
  EXPECT_NEAR(fit.value("c_sq") / truth.c_sq, 1.0, rel);
  EXPECT_NEAR(fit.value("c_s") / truth.c_s, 1.0, rel);
  EXPECT_NEAR(fit.value("phi_off") / truth.phi_off, 1.0, rel);
}

}  // namespace

TEST(ReflectionCoefficient, DecoupledQubitReflectsFully) {
  for (double delta : {-1e7, 0.0, 3e6}) {
    const auto r = reflection_coefficient(0.0, 1e6, delta);
    EXPECT_DOUBLE_EQ(r.real(), -1.0);
    EXPECT_DOUBLE_EQ(r.imag(), 0.0);
  }
}

TEST(ReflectionCoefficient, LosslessResonanceFlipsSign) {
  const double g1 = kTwoPi * 1.9e6;
  const auto r = reflection_coefficient(g1, g1 / 2.0, 0.0);
  EXPECT_NEAR(r.real(), 1.0, 1e-15);
  EXPECT_NEAR(r.imag(), 0.0, 1e-15);
}

TEST(ReflectionCoefficient, PaperRatesGoldenValue) {
  const double g1 = kTwoPi * 1.9e6;
  const double g2 = g1 / 2.0 + kTwoPi * 0.7e6;
  const double delta = kTwoPi * 1e6;
  const auto r = reflection_coefficient(g1, g2, delta);
  const auto expected = oracle::reflection(g1, g2, delta);
  EXPECT_NEAR(r.real(), expected.real(), 1e-14);
  EXPECT_NEAR(r.imag(), expected.imag(), 1e-14);
  // 1.9 / (1.65 + i) - 1
  EXPECT_NEAR(r.real(), 1.9 * 1.65 / (1.65 * 1.65 + 1.0) - 1.0, 1e-12);
  EXPECT_NEAR(r.imag(), -1.9 / (1.65 * 1.65 + 1.0), 1e-12);
}

TEST(ReflectionCoefficient, RejectsUnphysicalDephasing) {
  EXPECT_THROW(reflection_coefficient(2.0, 0.9, 0.0), Error);
}

TEST(SynthesizeTrace, NoiselessTraceIsTheModel) {
  const Device d = paper2017_device();
  const auto grid = detuning_grid(kTwoPi * 8e6, 101);
  const auto trace = synthesize_trace(d, FluxBias{0.1}, grid, 0.0, 7);
  const LineRates rates = spectroscopic_rates(d, FluxBias{0.1});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto expected = oracle::reflection(rates.gamma1, rates.gamma2, grid[k]);
    EXPECT_NEAR(trace.r_values[k].real(), expected.real(), 1e-14);
    EXPECT_NEAR(trace.r_values[k].imag(), expected.imag(), 1e-14);
  }
}

TEST(SynthesizeTrace, SameSeedSameTrace) {
  const Device d = paper2017_device();
  const auto grid = detuning_grid(kTwoPi * 8e6, 101);
  const auto a = synthesize_trace(d, FluxBias{0.0}, grid, 0.05, 42);
  const auto b = synthesize_trace(d, FluxBias{0.0}, grid, 0.05, 42);
  const auto c = synthesize_trace(d, FluxBias{0.0}, grid, 0.05, 43);
  EXPECT_EQ(a.r_values, b.r_values);
  EXPECT_NE(a.r_values, c.r_values);
}

TEST(SynthesizeTrace, LinewidthAtIntegerFlux) {
  const Device d = paper2017_device();
  const LineRates rates = spectroscopic_rates(d, FluxBias{0.0});
  // Gamma_2 = Gamma_1 / 2 + Gamma_phi with the published 1.9 and 0.7 MHz.
  EXPECT_NEAR(rates.gamma2 / kTwoPi, 1.65e6, 0.05e6);
  const auto trace = synthesize_trace(d, FluxBias{0.0}, detuning_grid(4.0 * rates.gamma2, 201), 0.0, 1);
  const FitResult fit = fit_trace(trace);
  EXPECT_NEAR(fit.value("gamma2") / rates.gamma2, 1.0, 1e-6);
}

TEST(FitTrace, NoiselessRecovery) {
  const Device d = paper2017_device();
  for (double phi : {0.0, 0.2, -0.3, 0.5}) {
    const LineRates rates = spectroscopic_rates(d, FluxBias{phi});
    const auto trace = synthesize_trace(d, FluxBias{phi}, detuning_grid(4.0 * rates.gamma2, 201), 0.0, 1);
    const FitResult fit = fit_trace(trace);
    ASSERT_TRUE(fit.converged) << phi;
    EXPECT_NEAR(fit.value("gamma1") / rates.gamma1, 1.0, 1e-3);
    EXPECT_NEAR(fit.value("gamma2") / rates.gamma2, 1.0, 1e-3);
    EXPECT_LT(fit.residual_norm, 1e-9);
  }
}

TEST(FitTrace, NoisyRecoveryMedianWithinFivePercent) {
  const Device d = paper2017_device();
  const LineRates rates = spectroscopic_rates(d, FluxBias{0.0});
  const auto grid = detuning_grid(4.0 * rates.gamma2, 201);
  std::vector<double> err1, err2;
  for (std::uint64_t seed = 1; seed <= 21; ++seed) {
    const FitResult fit = fit_trace(synthesize_trace(d, FluxBias{0.0}, grid, 0.05, seed));
    err1.push_back(std::abs(fit.value("gamma1") / rates.gamma1 - 1.0));
    err2.push_back(std::abs(fit.value("gamma2") / rates.gamma2 - 1.0));
  }
  EXPECT_LT(median(err1), 0.05);
  EXPECT_LT(median(err2), 0.05);
}

TEST(FitTrace, DecoupledTraceIsDegenerate) {
  const Device d = paper2017_device();
  const auto trace = synthesize_trace(d, FluxBias{d.decoupling_flux()}, detuning_grid(kTwoPi * 5e6, 201), 0.01, 3);
  const FitResult fit = fit_trace(trace);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_FALSE(fit.converged);
}

TEST(SpectroscopySweep, DephasingNonNegativeOnConvergentFits) {
  const Device d = paper2017_device();
  std::vector<double> fluxes;
  for (int k = 0; k <= 40; ++k) fluxes.push_back(-0.5 + k * 0.025);
  const auto grid = detuning_grid(kTwoPi * 8e6, 201);
  const auto sweep = spectroscopy_sweep(d, fluxes, grid, 0.01, 11, 0);
  int converged = 0;
  for (const auto& p : sweep) {
    if (!p.converged) continue;
    ++converged;
    EXPECT_GE(p.point.gamma2 - p.point.gamma1 / 2.0, 0.0) << p.point.flux;
  }
  EXPECT_GT(converged, 30);
}

TEST(SpectroscopySweep, ThreadCountDoesNotChangeResults) {
  const Device d = paper2017_device();
  const std::vector<double> fluxes = {-0.3, -0.1, 0.0, 0.15, 0.25};
  const auto grid = detuning_grid(kTwoPi * 8e6, 101);
  const auto a = spectroscopy_sweep(d, fluxes, grid, 0.02, 5, 1);
  const auto b = spectroscopy_sweep(d, fluxes, grid, 0.02, 5, 4);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].point.gamma1, b[k].point.gamma1);
    EXPECT_EQ(a[k].point.gamma2, b[k].point.gamma2);
  }
}

TEST(FitFluxCurve, NoiselessPaperCurveRecovered) {
  const Device d = paper2017_device();
  const auto points = synthetic_flux_curve(d, period_grid(1001), 0.0, 1);
  const FitResult fit = fit_flux_curve(points, d);
  ASSERT_TRUE(fit.converged);
  const CurveParams truth = curve_params(d);
  EXPECT_NEAR(truth.ic1, 30e-9, 1e-15);
  EXPECT_NEAR(truth.c_s, 31e-15, 1e-21);
  expect_params_within(fit, truth, 0.01);
}

TEST(FitFluxCurve, RandomParameterDrawsRecovered) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Device base = paper2017_device();
  for (int draw = 0; draw < 3; ++draw) {
    CurveParams p;
    p.ic1 = (26.0 + 8.0 * u(rng)) * 1e-9;
    p.ic2 = (40.0 + 10.0 * u(rng)) * 1e-9;
    p.c_sq = (28.0 + 10.0 * u(rng)) * 1e-15;
    p.c_s = (27.0 + 8.0 * u(rng)) * 1e-15;
    p.phi_off = -0.25 + 0.15 * u(rng);
    const Device truth = with_curve_params(base, p);
    const auto points = synthetic_flux_curve(truth, period_grid(1001), 0.0, 1);
    const FitResult fit = fit_flux_curve(points, base);
    expect_params_within(fit, p, 0.01);
  }
}

TEST(FitFluxCurve, SymmetricJunctionsGiveZeroAsymmetry) {
  CurveParams p = curve_params(paper2017_device());
  p.ic1 = p.ic2 = 38e-9;
  const Device truth = with_curve_params(paper2017_device(), p);
  const auto points = synthetic_flux_curve(truth, period_grid(1001), 0.0, 1);
  const FitResult fit = fit_flux_curve(points, paper2017_device());
  const double ic1 = fit.value("ic1"), ic2 = fit.value("ic2");
  EXPECT_LT(std::abs(ic2 - ic1) / (ic1 + ic2), 0.01);
}

TEST(FitFluxCurve, FittedMaximumNearIntegerFlux) {
  const Device d = paper2017_device();
  const auto points = synthetic_flux_curve(d, period_grid(1001), 0.0, 1);
  const FitResult fit = fit_flux_curve(points, d);
  const Device fitted = with_curve_params(
      d, CurveParams{fit.value("ic1"), fit.value("ic2"), fit.value("c_sq"), fit.value("c_s"), fit.value("phi_off")});
  EXPECT_NEAR(fitted.emission_rate(0.0) / kTwoPi, 1.9e6, 0.15e6);
  double best = 0.0, arg = 0.0;
  for (int k = -100; k <= 100; ++k) {
    const double g = fitted.emission_rate(k * 1e-3);
    if (g > best) best = g, arg = k * 1e-3;
  }
  EXPECT_NEAR(arg, 0.0, 0.05);
}

TEST(FitFluxCurve, OnOffRatio) {
  EXPECT_GE(on_off_ratio(paper2017_device(), 1e-3), 35.0);
}

TEST(InferLineLength, QuarterWaveAtHalfFlux) {
  const Device d = paper2017_device();
  const double lambda = kTwoPi * d.line.v / d.transmon.omega01;
  EXPECT_NEAR(infer_line_length(FluxBias{0.5}, d.transmon.omega01, d.line.v), lambda / 4.0, 1e-15);
  EXPECT_NEAR(infer_line_length(FluxBias{0.45}, d.transmon.omega01, d.line.v), 1.10 * lambda / 4.0, 1e-12);
}

TEST(InferLineLength, PaperDecouplingFlux) {
  const Device d = paper2017_device();
  const double lambda = kTwoPi * d.line.v / d.transmon.omega01;
  const double l = infer_line_length(FluxBias{0.39}, d.transmon.omega01, d.line.v);
  EXPECT_NEAR(l, oracle::line_length(0.39, lambda), 1e-15);
  EXPECT_NEAR(l, 9.49e-3, 0.01e-3);
}

TEST(InferLineLength, RejectsFluxOutsideHalfPeriod) {
  EXPECT_THROW(infer_line_length(FluxBias{0.6}, 1e10, 1e8), Error);
  EXPECT_THROW(infer_line_length(FluxBias{0.0}, 1e10, 1e8), Error);
}
