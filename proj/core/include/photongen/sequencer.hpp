#pragma once

// The measurement protocols as pulse programs, plus extraction of their
// figures of merit.

#include <optional>
#include <string>
#include <vector>

#include "photongen/device.hpp"
#include "photongen/least_squares.hpp"
#include "photongen/schedule.hpp"

namespace photongen {

struct FigureOfMerit {
  std::string name;
  double value = 0.0;
  double uncertainty = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
};

/// Gaussian excitation pulse; the amplitude is calibrated per device and flux.
struct PulseShape {
  double duration = 20e-9;
  double sigma = 5e-9;
};

/// Peak Rabi frequency that brings the qubit from |0> closest to the target
/// rotation: maximal |<b>| for angles below pi, maximal excited population
/// for pi. Simulated at `flux` with the device's own decoherence.
double calibrate_amplitude(const Device& device, double flux, double angle,
                           const PulseShape& shape = {});

/// Calibrated pulse rotating about +y, starting at `start`.
DrivePulse calibrated_pulse(const Device& device, double flux, double angle, double start,
                            const PulseShape& shape = {});

struct ExperimentOptions {
  double dt = 0.0;
  double record_interval = 1e-9;
  unsigned threads = 1;
};

struct RabiResult {
  std::vector<double> durations;
  std::vector<double> signal;  // integrated quadrature, rotated into I
  std::vector<double> power;   // integrated power
  double rotation = 0.0;       // common angle applied to the quadrature
  FitResult signal_fit;
  FitResult power_fit;
  std::optional<FigureOfMerit> t_rabi;
  /// Phase offset between the power and quadrature oscillations, in [0, pi].
  std::optional<double> phase_offset;
  double window = 0.0;  // integration window after each pulse
};

/// Square pulse of constant Rabi frequency `rabi` for each duration at fixed
/// flux, each followed by free emission integrated over `window` (zero picks
/// 5 / Gamma_2 at the flux). The integrated signal is normalized to the
/// number of samples.
RabiResult rabi_experiment(const Device& device, double flux, double rabi,
                           const std::vector<double>& durations, double window = 0.0,
                           const ExperimentOptions& options = {});

struct DecayResult {
  EmissionRecord record;
  FitResult fit;
  std::optional<FigureOfMerit> t2_star;  // empty when the signal does not decay
  bool no_decay = false;
  double fit_start = 0.0;
};

/// Calibrated pi/2 pulse at fixed flux followed by free emission; the
/// quadrature envelope after the pulse is fitted with an exponential.
DecayResult free_decay_experiment(const Device& device, double flux, double window = 0.0,
                                  const ExperimentOptions& options = {});

enum class Excitation { pi, half_pi, none };  // none leaves the qubit in its initial state

struct TriggeredOptions {
  double storage_time = 0.0;
  Excitation excitation = Excitation::half_pi;
  double lead_time = 100e-9;     // coupled idle before the flux pulse
  double settle_time = 400e-9;   // at the decoupling point before excitation
  double emission_window = 0.0;  // zero picks 10 / Gamma_2 at the coupled point
  double flux_ramp = 1e-9;
  std::optional<double> storage_flux;  // defaults to the decoupling flux
  double release_flux = 0.0;
  PulseShape pulse;
  bool start_excited = false;  // skip the pulse and start from |1> (ideal tests)
};

struct TriggeredSchedule {
  PulseSchedule schedule;
  double pulse_start = 0.0;
  double pulse_end = 0.0;
  double release = 0.0;  // start of the trailing flux edge
};

/// Builds the triggered-emission program. Throws ErrorCode::schedule if the
/// excitation pulse would overlap a flux edge.
TriggeredSchedule triggered_schedule(const Device& device, const TriggeredOptions& options);

struct TriggeredResult {
  EmissionRecord record;
  TriggeredSchedule program;
  double excited_at_release = 0.0;  // <n> at the release edge
  double burst_photons = 0.0;       // photons emitted after release
  double storage_peak_power = 0.0;  // max power during storage
  double burst_peak_power = 0.0;
  std::optional<FigureOfMerit> burst_tau;  // quadrature (pi/2) or power (pi) decay time
};

TriggeredResult triggered_emission(const Device& device, const TriggeredOptions& options,
                                   const ExperimentOptions& run = {});

struct DelayScanResult {
  std::vector<double> delays;
  std::vector<double> signal;
  FitResult fit;
  std::optional<FigureOfMerit> time;
};

/// pi pulse at the decoupling point, wait, pi/2 pulse, then release; the
/// integrated emission against the wait time gives T_1,i.
DelayScanResult intrinsic_t1_experiment(const Device& device, const std::vector<double>& delays,
                                        const ExperimentOptions& options = {});

/// pi/2 pulse at the decoupling point, wait, release; gives T_2,i*.
DelayScanResult intrinsic_t2_experiment(const Device& device, const std::vector<double>& delays,
                                        const ExperimentOptions& options = {});

/// 1 / T_phi = 1 / T_2 - 1 / (2 T_1).
double pure_dephasing_time(double t1, double t2);

struct JitterFigure {
  double t1_jit = 0.0;
  double ratio = 0.0;
};

/// T_1,jit = 1 / (2 (1 / T_2 - Gamma_phi)) at maximal coupling and the
/// storage/jitter ratio T_1,i / T_1,jit.
JitterFigure jitter_figure(double t1_intrinsic, double t2_min, double gamma_phi);

/// Closed-form two-level predictions used for cross-checks: Gamma_2 and the
/// Rabi envelope rate (Gamma_1 + Gamma_2) / 2 at a fixed flux, with the
/// thermal up and down rates summed into Gamma_1.
struct TwoLevelRates {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double rabi_decay = 0.0;
};
TwoLevelRates two_level_rates(const Device& device, double flux);

}  // namespace photongen
