#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "photongen/boundary_model.hpp"
#include "photongen/constants.hpp"
#include "photongen/device.hpp"
#include "photongen/errors.hpp"

using namespace photongen;

namespace {

constexpr double kTwoPi = 2.0 * oracle::pi;

SquidParams paper_squid() { return paper2017_device().squid; }

// Minimal dimensional analysis: exponents of kg, m, s, A.
struct Dim {
  int kg, m, s, a;
  constexpr Dim operator*(Dim o) const { return {kg + o.kg, m + o.m, s + o.s, a + o.a}; }
  constexpr Dim operator/(Dim o) const { return {kg - o.kg, m - o.m, s - o.s, a - o.a}; }
  constexpr bool operator==(const Dim&) const = default;
};
constexpr Dim kOhm{1, 2, -3, -2};
constexpr Dim kCoulomb{0, 0, 1, 1};
constexpr Dim kJouleSecond{1, 2, -1, 0};
constexpr Dim kJoule{1, 2, -2, 0};
constexpr Dim kFarad{-1, -2, 4, 2};
constexpr Dim kDimensionless{0, 0, 0, 0};
constexpr Dim kPerSecond{0, 0, -1, 0};

}  // namespace

TEST(BoundaryModel, RateFormulaIsDimensionallyARate) {
  constexpr Dim e_over_hbar = kCoulomb / kJouleSecond;
  constexpr Dim capacitance_ratio = kFarad / kFarad;
  constexpr Dim energy_ratio = kJoule / kJoule;
  static_assert(capacitance_ratio == kDimensionless && energy_ratio == kDimensionless);
  static_assert(kOhm * e_over_hbar * e_over_hbar * capacitance_ratio * kJoule == kPerSecond);
  SUCCEED();
}

TEST(EffectiveCriticalCurrent, PaperJunctionsAtIntegerFlux) {
  EXPECT_NEAR(effective_critical_current(FluxBias{0.0}, paper_squid()), 76e-9, 1e-18);
}

TEST(EffectiveCriticalCurrent, HalfFluxLeavesAsymmetry) {
  EXPECT_NEAR(effective_critical_current(FluxBias{0.5}, paper_squid()), 16e-9, 1e-18);
}

TEST(EffectiveCriticalCurrent, QuarterFluxMatchesBruteForce) {
  const double expected = std::sqrt((76.0 * 76.0 + 16.0 * 16.0) / 2.0) * 1e-9;
  EXPECT_NEAR(effective_critical_current(FluxBias{0.25}, paper_squid()), expected, 1e-15);
  for (double phi : {0.0, 0.1, 0.25, 0.37, 0.5, 0.73, 1.2, -0.4}) {
    const double brute = oracle::squid_critical_current(phi, 30e-9, 46e-9);
    EXPECT_NEAR(effective_critical_current(FluxBias{phi}, paper_squid()) / brute, 1.0, 1e-9) << phi;
  }
}

TEST(SquidInductance, PaperValueAtIntegerFlux) {
  const double l = squid_inductance(FluxBias{0.0}, paper_squid());
  EXPECT_NEAR(l, oracle::phi0 / (kTwoPi * 76e-9), 1e-20);
  EXPECT_NEAR(l, 4.33e-9, 0.005e-9);
}

TEST(SquidInductance, PeriodicInFlux) {
  for (double phi : {0.0, 0.21, 0.39}) {
    EXPECT_DOUBLE_EQ(squid_inductance(FluxBias{phi}, paper_squid()),
                     squid_inductance(FluxBias{phi + 1.0}, paper_squid()));
  }
}

TEST(SquidInductance, SymmetricSquidIsOpenAtHalfFlux) {
  SquidParams sq = paper_squid();
  sq.ic2 = sq.ic1;
  try {
    squid_inductance(FluxBias{0.5}, sq);
    FAIL() << "expected degenerate_flux";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_flux);
  }
}

TEST(ReflectionPhase, ShortAndOpenLimits) {
  const double w = kTwoPi * 3.69e9;
  EXPECT_DOUBLE_EQ(termination_phase(std::numeric_limits<double>::infinity(), 33e-15, w, 50.0), 0.0);
  EXPECT_DOUBLE_EQ(oracle::pi - termination_phase(std::numeric_limits<double>::infinity(), 0.0, w, 50.0),
                   oracle::pi);
  EXPECT_NEAR(oracle::pi - termination_phase(0.0, 0.0, w, 50.0), 0.0, 1e-15);
}

TEST(ReflectionPhase, MatchesComplexReflectionOracle) {
  const Device d = paper2017_device();
  const double w = d.transmon.omega01;
  for (double phi : {0.0, 0.39, 0.2, 0.5, 0.61, -0.3}) {
    const double l = squid_inductance(FluxBias{phi}, d.squid);
    const double expected = oracle::squid_phase(l, d.squid.c_sq, w, d.line.z0);
    EXPECT_NEAR(squid_phase(FluxBias{phi}, w, d.line, d.squid), expected, 1e-12) << phi;
    EXPECT_NEAR(reflection_phase(FluxBias{phi}, w, d.line, d.squid), oracle::pi - expected, 1e-12);
  }
}

TEST(ReflectionPhase, InRangeContinuousAndPeriodic) {
  const Device d = paper2017_device();
  const double w = d.transmon.omega01;
  double prev = reflection_phase(FluxBias{-0.499}, w, d.line, d.squid);
  for (int k = -498; k <= 499; ++k) {
    const double phi = k * 1e-3;
    const double r = reflection_phase(FluxBias{phi}, w, d.line, d.squid);
    EXPECT_GT(r, 0.0);
    EXPECT_LE(r, oracle::pi);
    EXPECT_LT(std::abs(r - prev), 0.05) << phi;
    EXPECT_NEAR(r, reflection_phase(FluxBias{phi + 1.0}, w, d.line, d.squid), 1e-12);
    prev = r;
  }
}

TEST(SquidPhase, ShortCircuitIsZero) {
  EXPECT_EQ(termination_phase(std::numeric_limits<double>::infinity(), 0.0, 1e10, 50.0), 0.0);
}

TEST(SquidPhase, SmallInductanceLimit) {
  const double w = kTwoPi * 3.69e9;
  const double z0 = 50.0;
  const double l = 1e-3 * z0 / w;
  const double phase = termination_phase(1.0 / l, 0.0, w, z0);
  EXPECT_NEAR(phase / 2e-3, 1.0, 1e-3);
}

TEST(EffectiveLength, SmallInductanceMatchesLumpedLength) {
  Device d = paper2017_device();
  d.squid.ic1 = 1e-3;
  d.squid.ic2 = 1.2e-3;
  d.squid.c_sq = 1e-21;
  const double w = d.transmon.omega01;
  const double l = squid_inductance(FluxBias{0.0}, d.squid);
  ASSERT_LT(w * l / d.line.z0, 1e-3);
  const double ratio = effective_length(FluxBias{0.0}, w, d.line, d.squid) / (l / d.line.l0);
  EXPECT_NEAR(ratio, 1.0, 1e-3);
}

TEST(EffectiveLength, ZeroForIdealShort) {
  Device d = paper2017_device();
  d.squid.ic1 = d.squid.ic2 = 1e6;
  d.squid.c_sq = 1e-30;
  EXPECT_NEAR(effective_length(FluxBias{0.0}, d.transmon.omega01, d.line, d.squid), 0.0, 1e-12);
}

TEST(RoundTripPhase, HalfWaveFromAShort) {
  Device d = paper2017_device();
  d.squid.ic1 = d.squid.ic2 = 1e6;
  d.squid.c_sq = 1e-30;
  const double w = d.transmon.omega01;
  const double lambda = kTwoPi * d.line.v / w;
  const double theta = round_trip_phase(FluxBias{0.0}, w, lambda / 2.0, d.line, d.squid);
  EXPECT_NEAR(theta, oracle::pi - kTwoPi, 1e-9);
  EXPECT_TRUE(is_node(theta, 1e-6));
}

TEST(RoundTripPhase, QuarterWaveFromAnOpen) {
  Device d = paper2017_device();
  d.squid.ic1 = d.squid.ic2 = 1e-15;
  d.squid.c_sq = 1e-30;
  const double w = d.transmon.omega01;
  const double lambda = kTwoPi * d.line.v / w;
  const double theta = round_trip_phase(FluxBias{0.0}, w, lambda / 4.0, d.line, d.squid);
  EXPECT_NEAR(theta, -oracle::pi, 1e-6);
  EXPECT_TRUE(is_node(theta, 1e-5));
  EXPECT_FALSE(is_node(0.0, 1e-3));
}

// In the fitted model the geometric part of the round trip is carried by
// phi_off, so the node is where phi_SQ - 2 phi_off = pi.
TEST(RoundTripPhase, FittedNodeNearFirstDecouplingFlux) {
  const Device d = paper2017_device();
  const double w = d.transmon.omega01;
  const double phi = d.decoupling_flux();
  EXPECT_NEAR(phi, 0.39, 0.015);
  const double effective = squid_phase(FluxBias{phi}, w, d.line, d.squid) - 2.0 * d.coupling.phi_off;
  EXPECT_TRUE(is_node(-effective, 1e-6));
}

TEST(SpectralDensity, BoundedAndMatchesOracle) {
  const Device d = paper2017_device();
  const double w = d.transmon.omega01;
  for (int k = 0; k < 200; ++k) {
    const double phi = -1.0 + k * 0.01;
    const double s = spectral_density(FluxBias{phi}, w, d.coupling, d.line, d.squid);
    const double phase = oracle::squid_phase(squid_inductance(FluxBias{phi}, d.squid), d.squid.c_sq, w, d.line.z0);
    const double expected = 2.0 * oracle::hbar * w * std::pow(std::cos(phase / 2.0 - d.coupling.phi_off), 2);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 2.0 * oracle::hbar * w * (1.0 + 1e-12));
    EXPECT_NEAR(s / (2.0 * oracle::hbar * w), expected / (2.0 * oracle::hbar * w), 1e-12);
  }
}

TEST(SpectralDensity, MaximumAndNodeOfTheStandingWave) {
  Device d = paper2017_device();
  const double w = d.transmon.omega01;
  const double phase = squid_phase(FluxBias{0.0}, w, d.line, d.squid);
  d.coupling.phi_off = phase / 2.0;
  EXPECT_NEAR(spectral_density(FluxBias{0.0}, w, d.coupling, d.line, d.squid), 2.0 * oracle::hbar * w, 1e-40);
  d.coupling.phi_off = phase / 2.0 - oracle::pi / 2.0;
  EXPECT_NEAR(spectral_density(FluxBias{0.0}, w, d.coupling, d.line, d.squid) / (2.0 * oracle::hbar * w), 0.0, 1e-15);
}

TEST(SpectralDensity, NearlyZeroAtSecondDecouplingFlux) {
  const Device d = paper2017_device();
  const double w = d.transmon.omega01;
  const double s = spectral_density(FluxBias{0.61}, w, d.coupling, d.line, d.squid);
  EXPECT_LT(s / (2.0 * oracle::hbar * w), 1e-3);
}

TEST(EmissionRate, IdealMaximumWithDesignCoupling) {
  Device d = paper2017_device();
  d.coupling.c_s = 28e-15;
  const double w = d.transmon.omega01;
  const double gamma = emission_prefactor(d.coupling, d.line) * 2.0 * oracle::hbar * w;
  const double expected = oracle::emission_rate(d.line.z0, 28e-15, d.coupling.c_sigma,
                                                d.coupling.e_j / d.coupling.e_c, w, 0.0, 0.0);
  EXPECT_NEAR(gamma / expected, 1.0, 1e-12);
  EXPECT_NEAR(gamma / kTwoPi, 26e6, 1e6);
}

TEST(EmissionRate, FittedMaximumNearIntegerFlux) {
  const Device d = paper2017_device();
  EXPECT_NEAR(d.emission_rate(0.0) / kTwoPi, 1.9e6, 0.15e6);
  EXPECT_NEAR(d.max_emission_rate(), d.emission_rate(0.0), 0.02 * d.emission_rate(0.0));
}

TEST(EmissionRate, MatchesOracleAndVanishesAtNode) {
  const Device d = paper2017_device();
  const double w = d.transmon.omega01;
  for (double phi : {0.0, 0.13, 0.3, 0.5, 0.7, 0.95}) {
    const double phase = oracle::squid_phase(squid_inductance(FluxBias{phi}, d.squid), d.squid.c_sq, w, d.line.z0);
    const double expected = oracle::emission_rate(d.line.z0, d.coupling.c_s, d.coupling.c_sigma,
                                                  d.coupling.e_j / d.coupling.e_c, w, phase, d.coupling.phi_off);
    EXPECT_NEAR(d.emission_rate(phi) / expected, 1.0, 1e-10) << phi;
  }
  for (double z : d.emission_zeros()) EXPECT_NEAR(d.emission_rate(z) / d.max_emission_rate(), 0.0, 1e-9);
}

TEST(EmissionRate, PeriodicAndSymmetricForEqualJunctions) {
  Device d = paper2017_device();
  d.squid.ic2 = d.squid.ic1;
  for (double phi : {0.05, 0.2, 0.33, 0.45}) {
    EXPECT_NEAR(d.emission_rate(phi), d.emission_rate(-phi), 1e-9 * d.emission_rate(0.0));
    EXPECT_NEAR(d.emission_rate(phi), d.emission_rate(phi + 1.0), 1e-9 * d.emission_rate(0.0));
  }
}

TEST(EmissionRate, TwoZerosSymmetricAboutHalfFlux) {
  const Device d = paper2017_device();
  const auto zeros = d.emission_zeros();
  ASSERT_EQ(zeros.size(), 2u);
  EXPECT_NEAR(zeros[0] + zeros[1], 1.0, 1e-9);
  EXPECT_NEAR(zeros[0], 0.39, 0.015);
  EXPECT_NEAR(zeros[1], 0.61, 0.015);
}

TEST(Validation, RejectsNonPhysicalParameters) {
  Device d = paper2017_device();
  d.squid.c_sq = -1e-15;
  EXPECT_THROW(d.validate(), Error);
  d = paper2017_device();
  d.coupling.c_s = d.coupling.c_sigma * 2.0;
  EXPECT_THROW(d.validate(), Error);
  d = paper2017_device();
  d.line.z0 = 0.0;
  EXPECT_THROW(d.validate(), Error);
}
