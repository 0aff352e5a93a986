#pragma once

// Weak-probe reflection spectroscopy: synthetic traces, per-trace Lorentzian
// fits, and the global fit of Gamma_1 against flux.

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "photongen/boundary_model.hpp"
#include "photongen/device.hpp"
#include "photongen/least_squares.hpp"

namespace photongen {

struct ReflectionTrace {
  FluxBias flux;
  double omega_ref = 0.0;            // qubit frequency the detuning axis refers to
  std::vector<double> detunings;     // omega01 - omega_probe (rad/s), increasing
  std::vector<std::complex<double>> r_values;
  std::uint64_t noise_seed = 0;
  double noise_sigma = 0.0;

  void validate() const;
};

/// r = -1 + Gamma_1 / (Gamma_2 + i delta_omega). Throws
/// ErrorCode::invalid_argument unless gamma2 >= gamma1 / 2 >= 0.
std::complex<double> reflection_coefficient(double gamma1, double gamma2, double delta_omega);

/// Uniform detuning grid of `points` samples over [-half_span, half_span].
std::vector<double> detuning_grid(double half_span, std::size_t points);

/// Radiative rate and total decoherence rate the device shows in
/// spectroscopy at this flux.
struct LineRates {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};
LineRates spectroscopic_rates(const Device& device, FluxBias flux);

/// Model trace plus complex Gaussian noise (std noise_sigma per
/// quadrature), reproducible from `seed`.
ReflectionTrace synthesize_trace(const Device& device, FluxBias flux,
                                 const std::vector<double>& detunings, double noise_sigma,
                                 std::uint64_t seed);

/// Joint fit of the real and imaginary parts. Parameters "gamma1", "gamma2",
/// "omega01". A trace whose dip is within the noise floor is returned with
/// `degenerate` set and `converged` false.
FitResult fit_trace(const ReflectionTrace& trace);

struct FluxPoint {
  double flux = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

/// Spectroscopy sweep over flux: one synthetic trace per flux, fitted
/// independently. Degenerate fits report gamma1 = 0.
struct SweepPoint {
  FluxPoint point;
  bool degenerate = false;
  bool converged = false;
};
std::vector<SweepPoint> spectroscopy_sweep(const Device& device, const std::vector<double>& fluxes,
                                           const std::vector<double>& detunings, double noise_sigma,
                                           std::uint64_t seed, unsigned threads = 1);

struct CurveParams {
  double ic1 = 0.0;
  double ic2 = 0.0;
  double c_sq = 0.0;
  double c_s = 0.0;
  double phi_off = 0.0;
};

/// Model Gamma_1 and Gamma_2 at each flux, Gamma_1 scaled by
/// max(0, 1 + noise_fraction * N(0, 1)) with one generator seeded by `seed`.
std::vector<FluxPoint> synthetic_flux_curve(const Device& device, const std::vector<double>& fluxes,
                                            double noise_fraction, std::uint64_t seed);

CurveParams curve_params(const Device& device);
Device with_curve_params(Device device, const CurveParams& p);

enum class CurveResidual { absolute, logarithmic };

struct CurveFitOptions {
  FitMethod method = FitMethod::nelder_mead;
  CurveResidual residual = CurveResidual::logarithmic;
  bool polish = true;  // Levenberg-Marquardt after Nelder-Mead
  std::optional<CurveParams> initial;
};

/// Starting point from curve landmarks: a coarse scan over the SQUID
/// parameters, with phi_off placed on the observed zero and c_s from the
/// closed-form amplitude match.
CurveParams landmark_guess(const std::vector<FluxPoint>& points, const Device& base);

/// Global fit of Gamma_1(flux). Parameters "ic1", "ic2", "c_sq", "c_s",
/// "phi_off" with ic1 <= ic2. Needs at least 10 points spanning a period.
FitResult fit_flux_curve(const std::vector<FluxPoint>& points, const Device& base,
                         const CurveFitOptions& options = {});

/// max / min of Gamma_1 on a uniform grid with the given step over one period.
double on_off_ratio(const Device& device, double step = 1e-3);

/// L = (1 + f) lambda01 / 4 with f = (1/2 - flux) / (1/2). Throws
/// ErrorCode::out_of_range outside (0, 1/2].
double infer_line_length(FluxBias decoupling_flux, double omega01, double v);

}  // namespace photongen
