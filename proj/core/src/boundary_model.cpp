#include "photongen/boundary_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "photongen/constants.hpp"
#include "photongen/errors.hpp"

namespace photongen {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

double inverse_squid_inductance(FluxBias flux, const SquidParams& sq) {
  return constants::two_pi * effective_critical_current(flux, sq) / constants::flux_quantum;
}

}  // namespace

void LineParams::validate() const {
  require(positive_finite(z0), "line: z0 must be positive");
  require(positive_finite(v), "line: phase velocity must be positive");
  require(positive_finite(l0), "line: inductance per length must be positive");
  require(positive_finite(x_qubit), "line: qubit position must be positive");
}

double SquidParams::asymmetry() const { return std::abs(ic1 - ic2) / (ic1 + ic2); }

void SquidParams::validate() const {
  require(positive_finite(ic1) && positive_finite(ic2),
          "squid: critical currents must be positive");
  require(positive_finite(c_sq), "squid: capacitance must be positive");
  require(positive_finite(mutual), "squid: mutual inductance must be positive");
}

void CouplingParams::validate() const {
  require(positive_finite(c_s) && positive_finite(c_sigma) && c_s < c_sigma,
          "coupling: need 0 < c_s < c_sigma");
  require(positive_finite(e_j) && positive_finite(e_c), "coupling: E_J and E_C must be positive");
  require(std::isfinite(phi_off), "coupling: phi_off must be finite");
}

double effective_critical_current(FluxBias flux, const SquidParams& sq) {
  const double d = sq.asymmetry();
  const double c = std::cos(constants::pi * flux.phi);
  const double s = std::sin(constants::pi * flux.phi);
  return (sq.ic1 + sq.ic2) * std::sqrt(c * c + d * d * s * s);
}

double squid_inductance(FluxBias flux, const SquidParams& sq) {
  const double ic = effective_critical_current(flux, sq);
  // A symmetric SQUID at half flux only gets rounding noise here.
  if (!(ic > 1e-12 * (sq.ic1 + sq.ic2))) {
    throw Error(ErrorCode::degenerate_flux,
                "SQUID critical current vanishes at flux " + std::to_string(flux.phi));
  }
  return constants::flux_quantum / (constants::two_pi * ic);
}

double termination_phase(double inverse_inductance, double capacitance, double omega,
                         double z0) {
  // Z_SQ = i omega L / (1 - omega^2 L C) and the reflection phase is
  // pi - 2 atan(|Z_SQ| / Z0). Written in terms of the admittance so that the
  // open-circuit limit and the plasma resonance are both regular.
  const double susceptance_ratio = z0 * (inverse_inductance / omega - omega * capacitance);
  if (std::isinf(susceptance_ratio)) return 0.0;
  return 2.0 * std::atan2(1.0, susceptance_ratio);
}

double squid_phase(FluxBias flux, double omega, const LineParams& line, const SquidParams& sq) {
  return termination_phase(inverse_squid_inductance(flux, sq), sq.c_sq, omega, line.z0);
}

double reflection_phase(FluxBias flux, double omega, const LineParams& line,
                        const SquidParams& sq) {
  return constants::pi - squid_phase(flux, omega, line, sq);
}

double effective_length(FluxBias flux, double omega, const LineParams& line,
                        const SquidParams& sq) {
  return squid_phase(flux, omega, line, sq) * line.v / (2.0 * omega);
}

double round_trip_phase(FluxBias flux, double omega, double x, const LineParams& line,
                        const SquidParams& sq) {
  return constants::pi - squid_phase(flux, omega, line, sq) - 2.0 * omega * x / line.v;
}

bool is_node(double round_trip, double tolerance) {
  double wrapped = std::fmod(round_trip, constants::two_pi);
  if (wrapped < 0.0) wrapped += constants::two_pi;
  return std::abs(wrapped - constants::pi) < tolerance;
}

double spectral_density(FluxBias flux, double omega, const CouplingParams& coupling,
                        const LineParams& line, const SquidParams& sq) {
  const double c = std::cos(0.5 * squid_phase(flux, omega, line, sq) - coupling.phi_off);
  return 2.0 * constants::hbar * omega * c * c;
}

double emission_prefactor(const CouplingParams& coupling, const LineParams& line) {
  const double charge_ratio = constants::elementary_charge / constants::hbar;
  const double cap_ratio = coupling.c_s / coupling.c_sigma;
  return line.z0 * charge_ratio * charge_ratio * cap_ratio * cap_ratio *
         std::sqrt(coupling.e_j / (2.0 * coupling.e_c));
}

double emission_rate(FluxBias flux, const CouplingParams& coupling, const LineParams& line,
                     const SquidParams& sq, double omega01) {
  return emission_prefactor(coupling, line) *
         spectral_density(flux, omega01, coupling, line, sq);
}

}  // namespace photongen
