#pragma once

// Reflection off a SQUID-terminated transmission line and the resulting
// emission rate of a transmon placed in front of it.
//
// All public entry points take flux in units of the flux quantum; everything
// else is SI with angular frequencies in rad/s.

namespace photongen {

struct LineParams {
  double z0 = 50.0;       // characteristic impedance (ohm)
  double v = 0.0;         // phase velocity (m/s)
  double l0 = 0.0;        // inductance per unit length (H/m)
  double x_qubit = 0.0;   // qubit distance from the line end (m)

  void validate() const;
};

struct SquidParams {
  double ic1 = 0.0;     // junction critical currents (A)
  double ic2 = 0.0;
  double c_sq = 0.0;    // total SQUID capacitance (F)
  double mutual = 0.0;  // bias-line mutual inductance (H)

  double asymmetry() const;
  void validate() const;
};

/// Flux through the SQUID loop in units of the flux quantum.
struct FluxBias {
  double phi = 0.0;
};

struct CouplingParams {
  double c_s = 0.0;      // qubit-line coupling capacitance (F)
  double c_sigma = 0.0;  // total qubit capacitance (F)
  double e_j = 0.0;      // Josephson energy (J)
  double e_c = 0.0;      // charging energy (J)
  double phi_off = 0.0;  // length-mismatch phase offset (rad)

  void validate() const;
};

/// I_C(Phi) of an asymmetric two-junction SQUID. Strictly positive whenever
/// the junctions differ, Phi0-periodic.
double effective_critical_current(FluxBias flux, const SquidParams& sq);

/// Josephson inductance Phi0 / (2 pi I_C(Phi)). Throws
/// ErrorCode::degenerate_flux when I_C(Phi) vanishes.
double squid_inductance(FluxBias flux, const SquidParams& sq);

/// Phase phi_SQ added by a parallel L-C termination relative to an ideal short,
/// as a continuous function of the inverse inductance. An infinite inverse
/// inductance is a perfect short (phi_SQ = 0); zero inverse inductance with
/// zero capacitance is a perfect open (phi_SQ = pi). Range [0, 2 pi); values
/// above pi only occur above the SQUID plasma frequency.
double termination_phase(double inverse_inductance, double capacitance, double omega,
                         double z0);

/// Total reflection phase pi - phi_SQ. Lies in (0, pi] below the SQUID plasma
/// frequency.
double reflection_phase(FluxBias flux, double omega, const LineParams& line,
                        const SquidParams& sq);

double squid_phase(FluxBias flux, double omega, const LineParams& line,
                   const SquidParams& sq);

/// Extra electrical length equivalent to the SQUID phase: phi_SQ v / (2 omega).
double effective_length(FluxBias flux, double omega, const LineParams& line,
                        const SquidParams& sq);

/// pi - phi_SQ - 2 omega x / v.
double round_trip_phase(FluxBias flux, double omega, double x, const LineParams& line,
                        const SquidParams& sq);

/// True when the round-trip phase sits on a vacuum-field node (pi mod 2 pi).
bool is_node(double round_trip, double tolerance);

/// Vacuum spectral density 2 hbar omega cos^2(phi_SQ/2 - phi_off), in J.
double spectral_density(FluxBias flux, double omega, const CouplingParams& coupling,
                        const LineParams& line, const SquidParams& sq);

/// Prefactor Z0 (e/hbar)^2 (C_s/C_Sigma)^2 sqrt(E_J / 2 E_C), mapping spectral
/// density (J) to a decay rate (rad/s).
double emission_prefactor(const CouplingParams& coupling, const LineParams& line);

/// Radiative decay rate Gamma_1 of the qubit into the line (rad/s).
double emission_rate(FluxBias flux, const CouplingParams& coupling, const LineParams& line,
                     const SquidParams& sq, double omega01);

}  // namespace photongen
