#pragma once

// Truncated Duffing-oscillator transmon in the frame rotating at the drive
// frequency, evolved under a time-dependent Lindblad generator with a fixed
// step fourth-order Runge-Kutta scheme.

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace photongen {

inline constexpr int kMaxLevels = 6;

using Complex = std::complex<double>;
using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxLevels, kMaxLevels>;
using DensityMatrix = Matrix;

/// Piecewise-linear, Phi0-periodic table of a rate against flux.
struct FluxTable {
  std::vector<double> flux;   // Phi0, strictly increasing within one period
  std::vector<double> value;  // rad/s

  bool empty() const { return flux.empty(); }
  double at(double phi) const;
  double max_value() const;
  void validate() const;
};

struct TransmonParams {
  double omega01 = 0.0;             // rad/s
  double alpha = 0.0;               // rad/s, negative for a transmon
  int levels = 3;
  double gamma1_intrinsic = 0.0;    // nonradiative decay (1/s)
  double gammaphi_intrinsic = 0.0;  // flux-independent pure dephasing (1/s)
  FluxTable gammaphi_flux;          // extra pure dephasing vs flux (1/s)
  double t_eff = 0.0;               // qubit bath temperature (K)
  double t_line = 0.0;              // temperature of the emission line (K)
  double gamma_excitation_line = 0.0;

  void validate() const;
  /// Bose occupation at omega01 for the intrinsic and excitation-line baths.
  double thermal_occupation() const;
  /// Bose occupation at omega01 for the emission line.
  double line_occupation() const;
};

/// Instantaneous drive in the rotating frame.
struct DriveSample {
  double rabi = 0.0;      // Omega(t), rad/s
  double phase = 0.0;     // rad; pi/2 rotates about +y
  double detuning = 0.0;  // omega01 - omega_drive, rad/s
};

enum class EnvelopeShape { gaussian, square, custom };

struct DrivePulse {
  EnvelopeShape shape = EnvelopeShape::gaussian;
  double amplitude = 0.0;  // peak Omega, rad/s
  double start = 0.0;      // s
  double duration = 0.0;   // s
  double sigma = 0.0;      // gaussian width (s); zero means duration / 4
  std::vector<double> samples;  // custom envelope, uniform over the pulse, scaled by amplitude
  double carrier_detuning = 0.0;
  double phase = 0.0;

  double end() const { return start + duration; }
  double envelope(double t) const;
  DriveSample sample(double t) const;
  void validate() const;
};

/// Everything the generator needs at one instant.
struct Controls {
  DriveSample drive;
  double gamma_rad = 0.0;       // radiative decay into the line (1/s)
  double gammaphi_extra = 0.0;  // flux-dependent pure dephasing (1/s)
};

using ControlFn = std::function<Controls(double t)>;

/// Collapse-operator rates for the current controls.
struct ChannelRates {
  double down = 0.0;
  double up = 0.0;
  double dephasing = 0.0;  // Gamma_phi; the operator is sqrt(2 Gamma_phi) b^dagger b

  double total() const { return down + up + 2.0 * dephasing; }
};

ChannelRates channel_rates(const TransmonParams& params, const Controls& controls);

/// H / hbar in rad/s.
Matrix build_hamiltonian(const TransmonParams& params, const DriveSample& drive);
Matrix build_hamiltonian(const TransmonParams& params, const DrivePulse& drive, double t);

Matrix lowering_operator(int levels);

/// Largest step the integrator accepts for these controls:
/// min(0.01 / max(Omega, diagonal spread of H, Gamma_tot), 1 ns).
double max_stable_step(const TransmonParams& params, const Controls& controls);

/// d rho / dt for the given controls, written out on the ladder structure.
void lindblad_rhs(const TransmonParams& params, const Controls& controls,
                  const DensityMatrix& rho, DensityMatrix& out);

/// One RK4 step from t to t + dt with controls sampled at the substep times.
/// Throws ErrorCode::step_size when dt exceeds the stability bound at any
/// substep.
DensityMatrix lindblad_step(const DensityMatrix& rho, const TransmonParams& params,
                            const ControlFn& controls, double t, double dt);

/// Convenience overload for a single drive pulse and a radiative rate profile.
DensityMatrix lindblad_step(const DensityMatrix& rho, const TransmonParams& params,
                            const DrivePulse& drive,
                            const std::function<double(double)>& gamma1_of_t, double t,
                            double dt);

struct OutputMoments {
  double i = 0.0;
  double q = 0.0;
  double power = 0.0;
};

Complex lowering_expectation(const DensityMatrix& rho);
double number_expectation(const DensityMatrix& rho);
OutputMoments output_moments(const DensityMatrix& rho, double gamma1_now);

DensityMatrix ground_state(int levels);
DensityMatrix fock_state(int levels, int n);
DensityMatrix pure_state(const Eigen::VectorXcd& psi);

/// Stationary state of the undriven generator: the ladder obeys detailed
/// balance p_{j+1} / p_j = up / down.
DensityMatrix steady_state(const TransmonParams& params, double gamma_rad);

struct Annotation {
  double start = 0.0;
  double end = 0.0;
  std::string label;
};

struct EmissionRecord {
  std::vector<double> t;
  std::vector<double> i_quadrature;
  std::vector<double> q_quadrature;
  std::vector<double> power;
  std::vector<std::vector<double>> populations;  // [level][sample]
  std::vector<double> gamma1_trace;
  std::vector<double> flux;
  std::vector<Complex> lowering;  // <b> at each sample
  std::vector<double> emitted;    // running integral of Gamma_rad <n> at each sample
  std::vector<Annotation> annotations;

  double emitted_photons = 0.0;    // integral of Gamma_rad <n>
  double intrinsic_photons = 0.0;  // integral of (Gamma_1i + Gamma_exc) <n>
  long long steps = 0;

  std::size_t size() const { return t.size(); }
  void reserve(std::size_t n, int levels);
};

/// Rotates every quadrature sample by the common angle that maximizes the
/// integrated I signal; returns the angle applied.
double rotate_to_i(EmissionRecord& record);

struct SimulationOptions {
  double dt = 0.0;               // fixed step; zero selects the stability bound
  double record_interval = 1e-9; // spacing of recorded samples
  std::vector<double> snapshot_times;
  std::vector<double> breakpoints;  // times where controls have kinks
  bool record = true;
};

struct SimulationResult {
  EmissionRecord record;
  DensityMatrix final_state;
  std::vector<DensityMatrix> snapshots;  // in snapshot_times order
};

/// Integrates from t0 to t1. `flux_of_t` is only used to label the record and
/// may be empty.
SimulationResult simulate(const TransmonParams& params, const ControlFn& controls,
                          const DensityMatrix& initial, double t0, double t1,
                          const SimulationOptions& options,
                          const std::function<double(double)>& flux_of_t = {});

}  // namespace photongen
