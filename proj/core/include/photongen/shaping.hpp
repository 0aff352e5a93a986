#pragma once

// Inverse design of the emitted photon: target wavepacket -> emission rate
// -> flux trajectory, plus forward verification by simulation.

#include <functional>
#include <optional>
#include <vector>

#include "photongen/device.hpp"
#include "photongen/schedule.hpp"
#include "photongen/transmon_dynamics.hpp"

namespace photongen {

/// Real, nonnegative photon amplitude xi(t) in sqrt(photons / s) on a
/// uniform grid, with a constant carrier phase.
struct Wavepacket {
  std::vector<double> t;
  std::vector<double> amplitude;
  double phase = 0.0;

  std::size_t size() const { return t.size(); }
  double dt() const;
  /// Trapezoidal integral of |xi|^2.
  double norm() const;
  /// Uniform grid, matching lengths, nonnegative amplitudes, norm <= 1 + 1e-9.
  void validate() const;

  static Wavepacket sample(const std::function<double(double)>& xi, double t0, double t1,
                           std::size_t points);
};

/// xi(t) = sqrt(gamma) exp(-gamma t / 2) for t >= 0.
Wavepacket exponential_packet(double gamma, double t0, double t1, std::size_t points);
/// xi(t) = sqrt(gamma / 4) sech(gamma (t - tc) / 2); norm 1 on the full line.
Wavepacket sech_packet(double gamma, double tc, double t0, double t1, std::size_t points);
/// Time reverse of exponential_packet over [t0, t1]: rises towards t1.
Wavepacket rising_packet(double gamma, double t0, double t1, std::size_t points);

struct RateProfile {
  std::vector<double> t;
  std::vector<double> gamma;
  double clamped_fraction = 0.0;  // share of the target energy where the rate hit the cap
  double at(double time) const;   // linear interpolation, held constant outside
};

/// Gamma_1(t) = |xi|^2 / (1 - int_0^t |xi|^2), capped at gamma_max. Throws
/// ErrorCode::infeasible_target if more than `clamp_threshold` of the target
/// energy needs the cap.
RateProfile rate_from_target(const Wavepacket& target, double gamma_max,
                             double clamp_threshold = 0.05);

/// Monotonic pieces of the main emission lobe: positive runs from the curve
/// maximum up to the decoupling flux, negative is its mirror below the maximum.
enum class Branch { positive, negative };

struct BranchBounds {
  double peak_flux = 0.0;  // flux of the curve maximum
  double zero_flux = 0.0;  // decoupling flux at the other end of the branch
  double peak_rate = 0.0;
};

/// Throws ErrorCode::invalid_argument if Gamma_1 is not monotonic on the branch.
BranchBounds branch_bounds(const Device& device, Branch branch = Branch::positive);

/// Bisection inverse of Device::emission_rate on the branch. Throws
/// ErrorCode::out_of_range for rates outside [0, peak].
double flux_for_rate(const Device& device, double rate, const BranchBounds& bounds);

struct FluxTrajectory {
  std::vector<double> t;
  std::vector<double> flux;     // Phi0
  std::vector<double> current;  // A, flux * Phi0 / M
  double mutual_inductance = 0.0;

  std::size_t size() const { return t.size(); }
  double flux_at(double time) const;
  void validate() const;
};

FluxTrajectory flux_from_rate(const RateProfile& rate, const Device& device,
                              Branch branch = Branch::positive);

/// Wraps flux samples into a trajectory with bias currents.
FluxTrajectory make_trajectory(const Device& device, std::vector<double> t, std::vector<double> flux);

struct EdgeParams {
  FluxShape shape = FluxShape::square;
  std::optional<double> storage_flux;  // defaults to the decoupling flux
  double emit_flux = 0.0;
  double hold = 20e-9;        // time at the storage flux before the edge
  double ramp = 1e-9;         // square edge
  double edge_time = 0.0;     // zero picks 300 ns (exponential) or 800 ns (cubic)
  double duration = 2e-6;
  double dt = 0.25e-9;
};

/// Flux pulses with a square, falling-exponential or inverted-cubic
/// exponential edge from the storage point to the emission point.
FluxTrajectory emulate_paper_edges(const Device& device, const EdgeParams& params = {});

/// Rise time over fall time of the packet, both measured from the peak to
/// the 1/sqrt(2) amplitude points: near 0 for a sudden exponential emission,
/// 1 for a symmetric packet. Zero for an empty packet.
double rise_fall_ratio(const Wavepacket& packet);

/// Controls that follow the trajectory's flux (no drive).
ControlFn trajectory_controls(const Device& device, const FluxTrajectory& trajectory);

struct ShapeVerification {
  Wavepacket achieved;
  double l2_error = 0.0;  // ||achieved - target|| / ||target||
  double achieved_norm = 0.0;
  double intrinsic_loss = 0.0;  // photons lost to the intrinsic channels
  EmissionRecord record;
};

/// Forward simulation from |1> along the trajectory; the achieved amplitude
/// is sqrt(Gamma_1(t) <n>(t)) on the target grid.
ShapeVerification verify_shape(const FluxTrajectory& trajectory, const Wavepacket& target,
                               const Device& device, double dt = 0.0);

/// Copy of the device with intrinsic decay, dephasing and temperature removed.
Device ideal_emitter(Device device);

}  // namespace photongen
