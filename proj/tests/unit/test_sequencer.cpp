#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "photongen/device.hpp"
#include "photongen/errors.hpp"
#include "photongen/sequencer.hpp"
#include "photongen/shaping.hpp"

using namespace photongen;

namespace {

constexpr double kTwoPi = 2.0 * oracle::pi;

ExperimentOptions all_threads() {
  ExperimentOptions o;
  o.threads = 0;
  return o;
}

Device cold_device() {
  Device d = paper2017_device();
  d.transmon.t_eff = 0.0;
  return d;
}

std::vector<double> rabi_durations(const Device& d, double flux) {
  const double span = 5.0 / two_level_rates(d, flux).rabi_decay;
  std::vector<double> out;
  for (int k = 0; k <= 50; ++k) out.push_back(span * k / 50.0);
  return out;
}

std::vector<double> delays(double stop, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(stop * k / (n - 1));
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no photongen::Error thrown";
  return ErrorCode::io;
}

}  // namespace

TEST(Rabi, CoupledPointDecayMatchesClosedFormAndMeasurement) {
  const Device d = paper2017_device();
  const auto r = rabi_experiment(d, 0.0, kTwoPi * 10e6, rabi_durations(d, 0.0), 0.0, all_threads());
  ASSERT_TRUE(r.t_rabi.has_value());
  EXPECT_NEAR(r.t_rabi->value * two_level_rates(d, 0.0).rabi_decay, 1.0, 0.02);
  EXPECT_NEAR(r.t_rabi->value / 110e-9, 1.0, 0.25);
  ASSERT_TRUE(r.phase_offset.has_value());
  EXPECT_NEAR(*r.phase_offset, oracle::pi / 2.0, 0.02 * oracle::pi);
}

TEST(Rabi, ZeroDriveGivesFlatSignalAndFlaggedFit) {
  const Device d = paper2017_device();
  const auto r = rabi_experiment(d, 0.0, 0.0, delays(200e-9, 8), 300e-9, all_threads());
  EXPECT_FALSE(r.t_rabi.has_value());
  EXPECT_FALSE(r.phase_offset.has_value());
  EXPECT_FALSE(r.signal_fit.converged);
  const auto [lo, hi] = std::minmax_element(r.signal.begin(), r.signal.end());
  EXPECT_NEAR(*lo, *hi, 1e-9 * std::max(1.0, std::abs(*hi)));
}

TEST(Rabi, RejectsBadArguments) {
  const Device d = paper2017_device();
  EXPECT_EQ(code_of([&] { rabi_experiment(d, 0.0, -1.0, delays(1e-7, 8)); }),
            ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { rabi_experiment(d, 0.0, 1e7, delays(1e-7, 4)); }),
            ErrorCode::invalid_argument);
}

TEST(FreeDecay, CoupledPoint) {
  const Device d = paper2017_device();
  const auto r = free_decay_experiment(d, 0.0, 0.0, all_threads());
  ASSERT_TRUE(r.t2_star.has_value());
  EXPECT_FALSE(r.no_decay);
  EXPECT_NEAR(r.t2_star->value * two_level_rates(d, 0.0).gamma2, 1.0, 0.02);
  EXPECT_NEAR(r.t2_star->value / 81e-9, 1.0, 0.25);
}

TEST(FreeDecay, WeaklyCoupledPointIsSlower) {
  const Device d = paper2017_device();
  const auto r = free_decay_experiment(d, -0.45, 0.0, all_threads());
  ASSERT_TRUE(r.t2_star.has_value());
  EXPECT_NEAR(r.t2_star->value * two_level_rates(d, -0.45).gamma2, 1.0, 0.02);
  EXPECT_NEAR(r.t2_star->value / 370e-9, 1.0, 0.25);
}

TEST(FreeDecay, NoRatesMeansNoDecay) {
  const Device d = ideal_emitter(paper2017_device());
  const auto r = free_decay_experiment(d, d.decoupling_flux(), 0.0, all_threads());
  EXPECT_TRUE(r.no_decay);
  EXPECT_FALSE(r.t2_star.has_value());
}

TEST(Triggered, ImmediateReleaseEmitsWithCoupledDecayTime) {
  const Device d = paper2017_device();
  const auto r = triggered_emission(d, TriggeredOptions{}, all_threads());
  ASSERT_TRUE(r.burst_tau.has_value());
  EXPECT_NEAR(r.burst_tau->value / 81e-9, 1.0, 0.25);
  EXPECT_GT(r.burst_photons, 0.3);
  EXPECT_LT(r.storage_peak_power, 1e-6 * r.burst_peak_power);
}

TEST(Triggered, LongStorageShrinksButKeepsTheBurst) {
  const Device d = paper2017_device();
  TriggeredOptions shortest, stored;
  stored.storage_time = 2e-6;
  const auto a = triggered_emission(d, shortest, all_threads());
  const auto b = triggered_emission(d, stored, all_threads());
  EXPECT_LT(b.burst_photons, a.burst_photons);
  EXPECT_GT(b.burst_photons, 0.25 * a.burst_photons);
  EXPECT_LT(b.storage_peak_power, 1e-6 * b.burst_peak_power);
}

TEST(Triggered, NoExcitationNoBurst) {
  TriggeredOptions o;
  o.excitation = Excitation::none;
  const auto r = triggered_emission(cold_device(), o, all_threads());
  EXPECT_LT(r.burst_photons, 1e-9);
}

TEST(Triggered, IdealEmitterReleasesItsStoredExcitation) {
  TriggeredOptions o;
  o.start_excited = true;
  o.storage_time = 300e-9;
  const auto r = triggered_emission(ideal_emitter(paper2017_device()), o, all_threads());
  EXPECT_NEAR(r.burst_photons, r.excited_at_release, 1e-4);
  EXPECT_LE(r.burst_photons, 1.0 + 1e-9);
}

TEST(Triggered, PulseOverlappingFluxEdgeIsRejected) {
  const Device d = paper2017_device();
  TriggeredOptions o;
  o.storage_time = -5e-9;
  EXPECT_EQ(code_of([&] { triggered_schedule(d, o); }), ErrorCode::schedule);
  o.storage_time = 0.0;
  o.settle_time = -1e-9;
  EXPECT_EQ(code_of([&] { triggered_schedule(d, o); }), ErrorCode::schedule);
}

TEST(IntrinsicCoherence, T1AtZeroTemperatureIsTheBareLifetime) {
  const Device d = cold_device();
  const auto r = intrinsic_t1_experiment(d, delays(7.5e-6, 16), all_threads());
  ASSERT_TRUE(r.time.has_value());
  EXPECT_NEAR(r.time->value / 2.86e-6, 1.0, 0.02);
}

TEST(IntrinsicCoherence, T2AtZeroTemperatureAndSignalVanishesLate) {
  const Device d = cold_device();
  const auto r = intrinsic_t2_experiment(d, delays(8e-6, 16), all_threads());
  ASSERT_TRUE(r.time.has_value());
  EXPECT_NEAR(r.time->value * two_level_rates(d, d.decoupling_flux()).gamma2, 1.0, 0.05);
  EXPECT_NEAR(r.time->value / 1.33e-6, 1.0, 0.05);
  double peak = 0.0;
  for (double v : r.signal) peak = std::max(peak, std::abs(v));
  EXPECT_LT(std::abs(r.signal.back()), 0.01 * peak);
}

TEST(IntrinsicCoherence, WithoutDephasingT2IsTwiceT1) {
  Device d = cold_device();
  d.transmon.gammaphi_intrinsic = 0.0;
  for (double& v : d.transmon.gammaphi_flux.value) v = 0.0;
  const auto r = intrinsic_t2_experiment(d, delays(7.5e-6, 16), all_threads());
  ASSERT_TRUE(r.time.has_value());
  EXPECT_NEAR(r.time->value / (2.0 / d.transmon.gamma1_intrinsic), 1.0, 0.03);
}

TEST(IntrinsicCoherence, NoIntrinsicDecayGivesFlatCurve) {
  Device d = cold_device();
  d.transmon.gamma1_intrinsic = 0.0;
  const auto span = delays(7.5e-6, 16);
  const auto r = intrinsic_t1_experiment(d, span, all_threads());
  EXPECT_NEAR(r.signal.back() / r.signal.front(), 1.0, 0.03);
  EXPECT_FALSE(r.time.has_value());
}

TEST(PureDephasing, ClosedForm) {
  EXPECT_NEAR(pure_dephasing_time(2.86e-6, 1.33e-6), 1.0 / (1.0 / 1.33e-6 - 0.5 / 2.86e-6), 1e-15);
  EXPECT_TRUE(std::isinf(pure_dephasing_time(1e-6, 2e-6)));
}

TEST(Jitter, PublishedNumbers) {
  const double gphi = kTwoPi * 0.7e6;
  const auto j = jitter_figure(2.86e-6, 81e-9, gphi);
  EXPECT_NEAR(j.t1_jit, oracle::jitter_time(81e-9, gphi), 1e-15);
  EXPECT_NEAR(j.t1_jit, 63e-9, 1e-9);
  EXPECT_NEAR(j.ratio, 47.0, 2.0);
}

TEST(Jitter, TrivialCases) {
  EXPECT_NEAR(jitter_figure(1e-6, 80e-9, 0.0).t1_jit, 40e-9, 1e-18);
  const auto j = jitter_figure(1e-6, 80e-9, 0.0);
  EXPECT_NEAR(jitter_figure(j.t1_jit, 80e-9, 0.0).ratio, 1.0, 1e-12);
  EXPECT_THROW(jitter_figure(1e-6, 80e-9, 1.0 / 80e-9), Error);
}
