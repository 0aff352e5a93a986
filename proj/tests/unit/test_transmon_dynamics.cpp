#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "oracles.hpp"
#include "photongen/device.hpp"
#include "photongen/errors.hpp"
#include "photongen/least_squares.hpp"
#include "photongen/schedule.hpp"
#include "photongen/transmon_dynamics.hpp"

using namespace photongen;

namespace {

constexpr double kTwoPi = 2.0 * oracle::pi;

TransmonParams cold_params(int levels) {
  TransmonParams p;
  p.omega01 = kTwoPi * 3.69e9;
  p.alpha = kTwoPi * -141.7e6;
  p.levels = levels;
  return p;
}

ControlFn constant(double gamma_rad, double rabi = 0.0) {
  return [=](double) {
    Controls c;
    c.gamma_rad = gamma_rad;
    c.drive.rabi = rabi;
    c.drive.phase = oracle::pi / 2.0;
    return c;
  };
}

DensityMatrix plus_state(int levels) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(levels);
  psi(0) = psi(1) = 1.0 / std::sqrt(2.0);
  return pure_state(psi);
}

}  // namespace

TEST(Hamiltonian, DuffingDiagonalAtResonance) {
  const TransmonParams p = cold_params(4);
  const Matrix h = build_hamiltonian(p, DriveSample{});
  const double a = p.alpha;
  EXPECT_DOUBLE_EQ(h(0, 0).real(), 0.0);
  EXPECT_DOUBLE_EQ(h(1, 1).real(), 0.0);
  EXPECT_DOUBLE_EQ(h(2, 2).real(), a);
  EXPECT_DOUBLE_EQ(h(3, 3).real(), 3.0 * a);
  EXPECT_TRUE(h.isDiagonal());
}

TEST(Hamiltonian, TwoLevelRabiSplitting) {
  const TransmonParams p = cold_params(2);
  const double rabi = kTwoPi * 10e6;
  const Matrix h = build_hamiltonian(p, DriveSample{rabi, 0.3, 0.0});
  EXPECT_TRUE(h.isApprox(h.adjoint()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(h)};
  EXPECT_NEAR(es.eigenvalues()(0), -rabi / 2.0, 1e-6);
  EXPECT_NEAR(es.eigenvalues()(1), rabi / 2.0, 1e-6);
}

TEST(Hamiltonian, SecondLevelOffTwoPhotonResonanceByAnharmonicity) {
  const TransmonParams p = paper2017_device().transmon;
  ASSERT_EQ(p.levels, 3);
  const Matrix h = build_hamiltonian(p, DriveSample{});
  // E_2 - 2 E_1 in the rotating frame.
  EXPECT_NEAR((h(2, 2).real() - 2.0 * h(1, 1).real()) / kTwoPi, -141.7e6, 1e-3);
}

TEST(LindbladStep, NoRatesNoDriveLeavesDiagonalStateUnchanged) {
  const TransmonParams p = cold_params(3);
  DensityMatrix rho = DensityMatrix::Zero(3, 3);
  rho(0, 0) = 0.7;
  rho(1, 1) = 0.2;
  rho(2, 2) = 0.1;
  const double dt = max_stable_step(p, constant(0.0)(0.0));
  const DensityMatrix next = lindblad_step(rho, p, constant(0.0), 0.0, dt);
  EXPECT_EQ(next, rho);
}

TEST(LindbladStep, RejectsStepAboveStabilityBound) {
  const TransmonParams p = cold_params(3);
  const ControlFn c = constant(kTwoPi * 2e6, kTwoPi * 20e6);
  const double bound = max_stable_step(p, c(0.0));
  try {
    lindblad_step(ground_state(3), p, c, 0.0, 2.0 * bound);
    FAIL() << "expected step_size";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::step_size);
  }
  EXPECT_NO_THROW(lindblad_step(ground_state(3), p, c, 0.0, bound));
}

TEST(LindbladStep, TwoLevelDecayMatchesExponential) {
  const TransmonParams p = cold_params(2);
  const double gamma = kTwoPi * 1.9e6;
  SimulationOptions o;
  o.record_interval = 10e-9;
  const auto res = simulate(p, constant(gamma), fock_state(2, 1), 0.0, 5.0 / gamma, o);
  const auto& rec = res.record;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const double expected = std::exp(-gamma * rec.t[k]);
    EXPECT_NEAR(rec.populations[1][k] / expected, 1.0, 1e-6) << rec.t[k];
  }
}

TEST(LindbladStep, ThermalEquilibriumFollowsBoltzmann) {
  TransmonParams p = paper2017_device().transmon;
  p.gammaphi_flux = {};
  p.t_line = p.t_eff;  // line and qubit bath in equilibrium
  SimulationOptions o;
  o.record = false;
  const double gamma = kTwoPi * 2e6;
  const auto res = simulate(p, constant(gamma), ground_state(3), 0.0, 3e-6, o);
  const auto expected = oracle::thermal_populations(p.omega01, p.t_eff, 3);
  const double ratio = res.final_state(1, 1).real() / res.final_state(0, 0).real();
  EXPECT_NEAR(ratio, oracle::boltzmann_factor(p.omega01, p.t_eff), 1e-6);
  EXPECT_NEAR(ratio, 0.139, 0.002);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(res.final_state(k, k).real(), expected[k], 1e-7);
  const DensityMatrix ss = steady_state(p, gamma);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(ss(k, k).real(), expected[k], 1e-12);
}

TEST(OutputMoments, EqualSuperposition) {
  const double gamma = kTwoPi * 1.9e6;
  const auto m = output_moments(plus_state(3), gamma);
  EXPECT_NEAR(m.i, std::sqrt(gamma), 1e-9);
  EXPECT_NEAR(m.q, 0.0, 1e-12);
  EXPECT_NEAR(m.power, gamma / 2.0, 1e-6);
}

TEST(OutputMoments, ExcitedStateHasNoQuadrature) {
  const double gamma = kTwoPi * 1.9e6;
  const auto m = output_moments(fock_state(3, 1), gamma);
  EXPECT_EQ(m.i, 0.0);
  EXPECT_EQ(m.q, 0.0);
  EXPECT_NEAR(m.power, gamma, 1e-6);
}

TEST(RunSchedule, EmptyScheduleFromGroundIsSilent) {
  Device d = paper2017_device();
  d.transmon.t_eff = 0.0;
  PulseSchedule s;
  s.t_end = 200e-9;
  const auto res = run_schedule(d, s, ground_state(3));
  ASSERT_GT(res.record.size(), 100u);
  for (std::size_t k = 0; k < res.record.size(); ++k) {
    EXPECT_EQ(res.record.i_quadrature[k], 0.0);
    EXPECT_EQ(res.record.q_quadrature[k], 0.0);
    EXPECT_EQ(res.record.power[k], 0.0);
    EXPECT_EQ(res.record.populations[0][k], 1.0);
  }
}

TEST(Properties, TracePositivityAndPowerOverFiveMicroseconds) {
  const Device d = paper2017_device();
  PulseSchedule s;
  s.idle_flux = 0.0;
  FluxSegment seg;
  seg.shape = FluxShape::exp_edge;
  seg.level = d.decoupling_flux();
  seg.start = 50e-9;
  seg.duration = 1.5e-6;
  seg.edge_time = 200e-9;
  s.flux_segments.push_back(seg);
  DrivePulse pulse;
  pulse.amplitude = kTwoPi * 25e6;
  pulse.start = 100e-9;
  pulse.duration = 20e-9;
  pulse.sigma = 5e-9;
  pulse.phase = oracle::pi / 2.0;
  s.drive_segments.push_back(pulse);
  s.t_end = 5e-6;

  RunOptions o;
  o.record_interval = 5e-9;
  for (int k = 1; k < 100; ++k) o.snapshot_times.push_back(k * 50e-9);
  const auto res = run_schedule(d, s, steady_state(d.transmon, d.emission_rate(0.0)), o);
  const auto& rec = res.record;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    double trace = 0.0;
    for (const auto& level : rec.populations) trace += level[k];
    EXPECT_LT(std::abs(trace - 1.0), 1e-8);
    EXPECT_GE(rec.power[k], 0.0);
  }
  for (const auto& rho : res.snapshots) {
    EXPECT_LT((rho - rho.adjoint()).norm(), 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(rho)};
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-8);
  }
}

TEST(Properties, PhotonAccountingAtZeroTemperature) {
  Device d = paper2017_device();
  d.transmon.t_eff = 0.0;
  d.transmon.gamma_excitation_line = kTwoPi * 0.05e6;
  const double gamma = d.emission_rate(0.0);
  SimulationOptions o;
  o.record_interval = 1e-9;
  for (int n0 : {1, 2}) {
    const auto res = simulate(d.transmon, constant(gamma), fock_state(3, n0), 0.0, 400e-9, o);
    const double left = number_expectation(res.final_state);
    EXPECT_NEAR(res.record.emitted_photons + res.record.intrinsic_photons + left, n0, 1e-6);
  }
}

TEST(Properties, HalvingTheStepChangesObservablesBelowTolerance) {
  const Device d = paper2017_device();
  const double gamma = d.emission_rate(0.0);
  SimulationOptions coarse;
  coarse.dt = max_stable_step(d.transmon, constant(gamma, kTwoPi * 5e6)(0.0));
  coarse.record_interval = 10e-9;
  SimulationOptions fine = coarse;
  fine.dt = coarse.dt / 2.0;
  const auto a = simulate(d.transmon, constant(gamma, kTwoPi * 5e6), ground_state(3), 0.0, 500e-9, coarse);
  const auto b = simulate(d.transmon, constant(gamma, kTwoPi * 5e6), ground_state(3), 0.0, 500e-9, fine);
  ASSERT_EQ(a.record.size(), b.record.size());
  const double scale = std::sqrt(gamma);
  for (std::size_t k = 0; k < a.record.size(); ++k) {
    EXPECT_NEAR(a.record.populations[1][k], b.record.populations[1][k], 1e-6);
    EXPECT_NEAR(a.record.i_quadrature[k] / scale, b.record.i_quadrature[k] / scale, 1e-6);
  }
}

TEST(Properties, RabiFrequencyEqualsDriveAmplitude) {
  const TransmonParams p = cold_params(3);
  const double rabi = kTwoPi * 2e6;
  SimulationOptions o;
  o.record_interval = 2e-9;
  const auto res = simulate(p, constant(0.0, rabi), ground_state(3), 0.0, 2e-6, o);
  const FitResult fit = fit_damped_sinusoid(res.record.t, res.record.populations[1]);
  ASSERT_TRUE(fit.converged);
  EXPECT_NEAR(fit.value("frequency") / (rabi / kTwoPi), 1.0, 1e-3);
}

TEST(EmissionRecord, RotationAlignsSignalWithI) {
  const TransmonParams p = cold_params(3);
  const double gamma = kTwoPi * 2e6;
  SimulationOptions o;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(3);
  psi(0) = 1.0 / std::sqrt(2.0);
  psi(1) = Complex(0.0, 1.0) / std::sqrt(2.0);
  auto res = simulate(p, constant(gamma), pure_state(psi), 0.0, 300e-9, o);
  rotate_to_i(res.record);
  double sum_q = 0.0, sum_i = 0.0;
  for (std::size_t k = 0; k < res.record.size(); ++k) {
    sum_q += std::abs(res.record.q_quadrature[k]);
    sum_i += res.record.i_quadrature[k];
  }
  EXPECT_GT(sum_i, 0.0);
  EXPECT_LT(sum_q, 1e-9 * sum_i);
}
