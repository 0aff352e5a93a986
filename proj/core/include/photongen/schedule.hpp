#pragma once

// Experiment programs: drive pulses and flux pulses on a common clock.

#include <vector>

#include "photongen/device.hpp"
#include "photongen/transmon_dynamics.hpp"

namespace photongen {

enum class FluxShape { square, exp_edge, cubic_exp_edge, custom };

/// A flux excursion from the schedule's idle flux to `level`.
///
/// Every shape rises with a linear ramp of `ramp` seconds. The trailing edge
/// depends on the shape: square ramps back linearly over `ramp`, exp_edge
/// relaxes as exp(-s / edge_time) and cubic_exp_edge as
/// exp(-(s / edge_time)^3), where s is the time since the segment end.
/// Custom segments interpolate `samples` uniformly over the duration and drop
/// back to idle at the end.
struct FluxSegment {
  FluxShape shape = FluxShape::square;
  double level = 0.0;     // Phi0
  double start = 0.0;     // s
  double duration = 0.0;  // s
  double ramp = 1e-9;     // s
  double edge_time = 0.0; // s, exponential edges only
  std::vector<double> samples;

  double end() const { return start + duration; }
  /// Time after end() by which the trailing edge has (numerically) settled.
  double settle_time() const;
  void validate() const;
};

struct PulseSchedule {
  std::vector<DrivePulse> drive_segments;
  std::vector<FluxSegment> flux_segments;
  double idle_flux = 0.0;
  double t_end = 0.0;  // explicit end time; the program end is used if later

  /// Throws ErrorCode::schedule on unsorted or overlapping segments.
  void validate() const;
  double duration() const;
  double flux_at(double t) const;
  DriveSample drive_at(double t) const;
  double max_drive() const;
  /// Segment boundaries, where the controls have kinks.
  std::vector<double> breakpoints() const;
};

struct RunOptions {
  double dt = 0.0;
  double record_interval = 1e-9;
  std::vector<double> snapshot_times;
  bool record = true;
};

/// Controls for `schedule` on `device`: Gamma_1 follows the instantaneous
/// flux through the boundary model and the dephasing table is sampled at the
/// same flux.
ControlFn schedule_controls(const Device& device, const PulseSchedule& schedule);

/// Runs the program from t = 0 to schedule.duration().
SimulationResult run_schedule(const Device& device, const PulseSchedule& schedule,
                              const DensityMatrix& initial, const RunOptions& options = {});

}  // namespace photongen
