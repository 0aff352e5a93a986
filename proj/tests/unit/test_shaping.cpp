#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "photongen/device.hpp"
#include "photongen/errors.hpp"
#include "photongen/shaping.hpp"
#include "photongen/transmon_dynamics.hpp"

using namespace photongen;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no photongen::Error thrown";
  return ErrorCode::io;
}

// Ratio of a packet emitted by the ideal emitter along one of the edge families.
double edge_ratio(FluxShape shape) {
  const Device d = ideal_emitter(paper2017_device());
  EdgeParams p;
  p.shape = shape;
  const FluxTrajectory traj = emulate_paper_edges(d, p);
  SimulationOptions sim;
  const auto res = simulate(d.transmon, trajectory_controls(d, traj), fock_state(d.transmon.levels, 1),
                            traj.t.front(), traj.t.back(), sim, [&](double t) { return traj.flux_at(t); });
  Wavepacket w;
  w.t = res.record.t;
  for (double p2 : res.record.power) w.amplitude.push_back(std::sqrt(std::max(0.0, p2)));
  return rise_fall_ratio(w);
}

class Shaping : public ::testing::Test {
 protected:
  Device device = paper2017_device();
  Device ideal = ideal_emitter(paper2017_device());
  BranchBounds bounds = branch_bounds(paper2017_device());
};

}  // namespace

TEST_F(Shaping, ExponentialTargetNeedsConstantRate) {
  const double g = 0.5 * bounds.peak_rate;
  const auto rate = rate_from_target(exponential_packet(g, 0.0, 6.0 / g, 2001), bounds.peak_rate);
  EXPECT_EQ(rate.clamped_fraction, 0.0);
  for (double v : rate.gamma) EXPECT_NEAR(v / g, 1.0, 1e-3);
}

TEST_F(Shaping, SechTargetFollowsClosedForm) {
  const double g = 0.5 * bounds.peak_rate;
  const double tc = 8.0 / g;
  const auto rate = rate_from_target(sech_packet(g, tc, 0.0, 2.0 * tc, 4001), bounds.peak_rate);
  for (std::size_t k = 0; k < rate.t.size(); ++k) {
    if (rate.t[k] > tc + 1.0 / g) break;
    EXPECT_NEAR(rate.gamma[k] / oracle::sech_rate(g, rate.t[k], tc), 1.0, 2e-3) << rate.t[k];
  }
}

TEST_F(Shaping, RisingTargetIsInfeasibleOrClamped) {
  const double g = 0.5 * bounds.peak_rate;
  const Wavepacket target = rising_packet(g, 0.0, 8.0 / g, 2001);
  EXPECT_EQ(code_of([&] { rate_from_target(target, bounds.peak_rate); }), ErrorCode::infeasible_target);
  const auto rate = rate_from_target(target, bounds.peak_rate, 1.0);
  EXPECT_GT(rate.clamped_fraction, 0.05);
  for (double v : rate.gamma) EXPECT_LE(v, bounds.peak_rate);

  const auto v = verify_shape(flux_from_rate(rate, device), target, ideal);
  EXPECT_GT(v.l2_error, 0.05);
}

TEST_F(Shaping, ZeroRateSitsAtTheDecouplingFlux) {
  const double phi = flux_for_rate(device, 0.0, bounds);
  EXPECT_NEAR(phi, 0.39, 0.015);
  EXPECT_NEAR(phi, device.decoupling_flux(), 1e-9);
}

TEST_F(Shaping, PeakRateSitsAtTheCurveMaximum) {
  const double phi = flux_for_rate(device, bounds.peak_rate, bounds);
  EXPECT_NEAR(phi, bounds.peak_flux, 1e-6);
  EXPECT_NEAR(std::remainder(phi, 1.0), 0.0, 0.02);
}

TEST_F(Shaping, BisectionIsTheExactInverse) {
  for (Branch b : {Branch::positive, Branch::negative}) {
    const auto bb = branch_bounds(device, b);
    for (double f : {0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
      const double g = f * bb.peak_rate;
      EXPECT_NEAR(device.emission_rate(flux_for_rate(device, g, bb)) / g, 1.0, 1e-9);
    }
  }
}

TEST_F(Shaping, RatesOutsideTheBranchAreRejected) {
  EXPECT_EQ(code_of([&] { flux_for_rate(device, -1.0, bounds); }), ErrorCode::out_of_range);
  EXPECT_EQ(code_of([&] { flux_for_rate(device, 1.01 * bounds.peak_rate, bounds); }),
            ErrorCode::out_of_range);
}

TEST_F(Shaping, TrajectoryCurrentUsesMutualInductance) {
  const double g = 0.5 * bounds.peak_rate;
  const auto traj = flux_from_rate(rate_from_target(exponential_packet(g, 0.0, 6.0 / g, 501), bounds.peak_rate),
                                   device);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    EXPECT_NEAR(traj.current[k], traj.flux[k] * oracle::phi0 / device.squid.mutual,
                1e-12 * std::abs(traj.current[k]) + 1e-18);
    EXPECT_GE(traj.flux[k], bounds.peak_flux - 1e-12);
    EXPECT_LE(traj.flux[k], bounds.zero_flux + 1e-12);
  }
}

TEST_F(Shaping, ConstantRateReproducesExponentialTarget) {
  const double g = 0.5 * bounds.peak_rate;
  const Wavepacket target = exponential_packet(g, 0.0, 8.0 / g, 2001);
  const auto traj = flux_from_rate(rate_from_target(target, bounds.peak_rate), device);
  const auto v = verify_shape(traj, target, ideal);
  EXPECT_LT(v.l2_error, 1e-3);
}

TEST_F(Shaping, SechRoundTrip) {
  const double g = 0.6 * bounds.peak_rate;
  const double tc = 8.0 / g;
  const Wavepacket target = sech_packet(g, tc, 0.0, 2.0 * tc, 2001);
  ASSERT_LE(target.norm(), 0.99 + 1e-2);
  const auto traj = flux_from_rate(rate_from_target(target, bounds.peak_rate), device);
  const auto v = verify_shape(traj, target, ideal);
  EXPECT_LT(v.l2_error, 1e-3);
  EXPECT_NEAR(v.achieved_norm, target.norm(), 1e-4);
  EXPECT_LT(v.intrinsic_loss, 1e-12);
}

TEST_F(Shaping, NormAccountsForIntrinsicLosses) {
  const double g = 0.5 * bounds.peak_rate;
  const Wavepacket target = exponential_packet(g, 0.0, 12.0 / g, 3001);
  Device lossy = ideal;
  lossy.transmon.gamma1_intrinsic = paper2017_device().transmon.gamma1_intrinsic;
  const auto traj = flux_from_rate(rate_from_target(target, bounds.peak_rate), device);
  const auto v = verify_shape(traj, target, lossy);
  EXPECT_GT(v.intrinsic_loss, 0.0);
  const double unemitted = std::exp(-(g + lossy.transmon.gamma1_intrinsic) * 12.0 / g);
  EXPECT_NEAR(v.achieved_norm, 1.0 - v.intrinsic_loss - unemitted, 1e-4);
}

TEST_F(Shaping, ZeroNormTargetGivesZeroPacket) {
  Wavepacket target = exponential_packet(1e7, 0.0, 1e-6, 101);
  for (double& a : target.amplitude) a = 0.0;
  const auto rate = rate_from_target(target, bounds.peak_rate);
  for (double v : rate.gamma) EXPECT_EQ(v, 0.0);
  const auto v = verify_shape(flux_from_rate(rate, device), target, ideal);
  EXPECT_LT(v.achieved_norm, 1e-12);
}

TEST_F(Shaping, WavepacketValidation) {
  Wavepacket w = exponential_packet(5e6, 0.0, 1e-6, 1001);
  EXPECT_NO_THROW(w.validate());
  w.amplitude[3] = -1.0;
  EXPECT_THROW(w.validate(), Error);
  Wavepacket big = exponential_packet(5e6, 0.0, 1e-6, 1001);
  for (double& a : big.amplitude) a *= 2.0;
  EXPECT_THROW(big.validate(), Error);
}

TEST(EdgeFamilies, SquareEdgeEmitsSuddenExponential) {
  EXPECT_LT(edge_ratio(FluxShape::square), 0.2);
}

TEST(EdgeFamilies, SoftEdgesApproachTheTimeReverse) {
  const double square = edge_ratio(FluxShape::square);
  const double exp_edge = edge_ratio(FluxShape::exp_edge);
  const double cubic = edge_ratio(FluxShape::cubic_exp_edge);
  EXPECT_GT(exp_edge, 0.5);
  EXPECT_GT(cubic, exp_edge);
  EXPECT_GT(cubic, 0.85);
  EXPECT_LT(square, exp_edge);
}
