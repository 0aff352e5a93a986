#pragma once

#include <string>
#include <vector>

#include "photongen/boundary_model.hpp"
#include "photongen/transmon_dynamics.hpp"

namespace photongen {

/// Full parameter set of one transmon in front of a SQUID mirror.
struct Device {
  LineParams line;
  SquidParams squid;
  CouplingParams coupling;
  TransmonParams transmon;

  void validate() const;

  /// Radiative Gamma_1 at omega01 (1/s).
  double emission_rate(double phi) const;
  /// Largest emission rate over one flux period.
  double max_emission_rate() const;
  /// Zeros of Gamma_1 in [0, 1), ascending.
  std::vector<double> emission_zeros() const;
  /// First zero of Gamma_1 in (0, 1/2]; throws ErrorCode::out_of_range if
  /// the coupling never vanishes there.
  double decoupling_flux() const;
  /// Gamma_phi at the given flux: intrinsic plus the tabulated excess.
  double dephasing_rate(double phi) const;
};

/// Transmon and line parameters of the published device with the SQUID and
/// coupling values from its flux-curve fit.
Device paper2017_device();

/// Same device with the design-estimate coupling capacitance of 28 fF.
Device estimated_device();

/// Named presets: "paper2017", "estimated". Throws ErrorCode::invalid_argument
/// for unknown names.
Device device_preset(const std::string& name);

}  // namespace photongen
