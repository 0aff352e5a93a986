#pragma once

// Run configuration. The file format is JSON in interface units (GHz, ns,
// fF, nA, pH, mK, flux in Phi0); parsing converts everything to SI with
// angular frequencies once, so the rest of the library never sees them.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "photongen/device.hpp"
#include "photongen/fidelity.hpp"
#include "photongen/schedule.hpp"
#include "photongen/sequencer.hpp"
#include "photongen/shaping.hpp"
#include "photongen/spectroscopy.hpp"

namespace photongen::io {

struct SpectroSweepConfig {
  double flux_start = -0.5;
  double flux_stop = 0.5;
  int flux_points = 101;
  double half_span = 0.0;  // rad/s; zero picks 4 Gamma_2 of the widest line
  int detuning_points = 201;
  double noise_sigma = 0.01;
};

struct FitCurveConfig {
  std::string input;  // CSV with flux and gamma1 columns; empty means synthetic data
  int points = 1001;  // synthetic grid over [0, 1)
  double noise_fraction = 0.0;
  CurveResidual residual = CurveResidual::logarithmic;
  FitMethod method = FitMethod::nelder_mead;
};

struct RabiConfig {
  double flux = 0.0;
  double rabi = 0.0;  // rad/s (Omega / 2 pi given in GHz)
  double duration_stop = 0.0;  // zero picks 5 / (Rabi envelope rate)
  int durations = 151;
  double window = 0.0;
};

struct DecayConfig {
  double flux = 0.0;
  double window = 0.0;
};

struct ShapedConfig {
  EdgeParams edge;
};

enum class TargetKind { sech, exponential, rising, csv };

struct InvertShapeConfig {
  TargetKind kind = TargetKind::sech;
  std::string input;             // csv targets: columns t (s) and amplitude
  double gamma_fraction = 0.5;   // packet rate as a fraction of the branch maximum
  double center = 150e-9;
  double t_start = 0.0;
  double t_stop = 400e-9;
  int points = 2001;
  Branch branch = Branch::positive;
  double clamp_threshold = 0.05;
  bool ideal = true;  // verify without intrinsic channels
};

struct FidelityTableConfig {
  std::vector<TargetState> targets = {TargetState::fock, TargetState::superposition};
  std::vector<double> storage_times = {100e-9, 1e-6};
};

struct NumericsConfig {
  double dt = 0.0;
  double record_interval = 1e-9;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct RunConfig {
  std::string profile = "paper2017";
  Device device;
  NumericsConfig numerics;
  std::string output_dir = "out";

  std::optional<SpectroSweepConfig> spectro_sweep;
  std::optional<FitCurveConfig> fit_curve;
  std::optional<RabiConfig> rabi;
  std::optional<DecayConfig> decay;
  std::optional<TriggeredOptions> triggered;
  std::optional<ShapedConfig> shaped;
  std::optional<InvertShapeConfig> invert_shape;
  std::optional<FidelityTableConfig> fidelity_table;

  /// Canonical JSON of everything that affects results (not the output
  /// directory or the thread count), in interface units.
  std::string canonical;
  std::uint64_t hash() const;
};

/// Subcommand names in a fixed order.
const std::vector<std::string>& subcommands();

struct ParseOverrides {
  std::optional<std::string> profile;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> output_dir;
};

/// Parses and validates a configuration. Errors are ErrorCode::validation
/// with the offending path in the message ("device.squid.c_sq: ...").
RunConfig parse_config(const std::string& text, const ParseOverrides& overrides = {});

/// Configuration with the named profile and an empty section for `subcommand`.
RunConfig default_config(const std::string& subcommand, const ParseOverrides& overrides = {});

/// Throws ErrorCode::validation naming "experiment.<subcommand>" when the
/// section is absent.
void require_section(const RunConfig& config, const std::string& subcommand);

}  // namespace photongen::io
