#pragma once

// Fidelity of the prepared qubit state and of the emitted photon state.

#include <string>
#include <vector>

#include "photongen/device.hpp"
#include "photongen/sequencer.hpp"
#include "photongen/shaping.hpp"
#include "photongen/transmon_dynamics.hpp"

namespace photongen {

enum class TargetState { fock, superposition };  // |1> or (|0> + |1>) / sqrt(2)

std::string to_string(TargetState target);
/// "fock" / "superposition"; throws ErrorCode::invalid_argument otherwise.
TargetState target_from_string(const std::string& name);

/// Pure target embedded in `levels` levels.
DensityMatrix target_density(TargetState target, int levels);

/// Uhlmann fidelity Tr[(sqrt(rho) sigma sqrt(rho))^(1/2)]. Throws
/// ErrorCode::validation on mismatched dimensions or inputs that are not
/// Hermitian positive semidefinite within 1e-8.
double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

struct FidelityOptions {
  PulseShape pulse;
  std::optional<double> storage_flux;  // defaults to the decoupling flux
  double emit_flux = 0.0;
  double flux_ramp = 1e-9;
  double window_factor = 25.0;  // emission window in units of 1 / Gamma_1 at emit_flux
  double record_interval = 0.1e-9;
  double dt = 0.0;
  unsigned threads = 1;
};

/// State after the calibrated pulse, starting from the thermal steady state
/// at the storage flux.
DensityMatrix prepared_state(const Device& device, TargetState target,
                             const FidelityOptions& options = {});

double preparation_fidelity(const Device& device, TargetState target,
                            const FidelityOptions& options = {});

/// How the release and emission map the qubit onto the photon mode:
/// `efficiency` is the share of the excitation that reaches the line and
/// `coherence` the share of <b> that survives in the mode overlap, both
/// measured on a reference emission of (|0> + |1>) / sqrt(2).
struct EmissionChannel {
  double efficiency = 0.0;
  double coherence = 0.0;
  double background_power = 0.0;  // steady-state emission at emit_flux, subtracted
  Wavepacket mode;                // normalized temporal mode of the photon
};

EmissionChannel emission_channel(const Device& device, const FidelityOptions& options = {});

/// Photon-mode state produced from the qubit state at release: bosonic loss
/// with transmission `efficiency`, off-diagonals further scaled so that the
/// single-photon coherence matches `coherence`.
DensityMatrix photon_state(const DensityMatrix& at_release, const EmissionChannel& channel);

/// Fidelity of the emitted photon state after `storage_time` at the storage flux.
double emission_efficiency(const Device& device, TargetState target, double storage_time,
                           const FidelityOptions& options = {});

struct BudgetItem {
  std::string channel;  // thermal, leakage, intrinsic_decay, dephasing, parasitic
  double deficit = 0.0;
};

struct LossBudget {
  std::vector<BudgetItem> items;
  double total_deficit = 0.0;
  double remainder = 0.0;  // total minus the item sum: channel interactions, signed
};

/// Deficits 1 - F with only one channel switched on over an ideal two-level,
/// zero-temperature baseline. Channels whose deficit is below 1e-9 are omitted.
LossBudget loss_budget(const Device& device, TargetState target, double storage_time,
                       const FidelityOptions& options = {});

struct FidelityReport {
  TargetState target = TargetState::fock;
  double prep_fidelity = 0.0;
  std::vector<double> storage_times;
  std::vector<double> emission_fidelity;
  double budget_storage_time = 0.0;
  LossBudget budget;
};

/// Table over storage times; the budget is taken at the longest storage time.
FidelityReport fidelity_report(const Device& device, TargetState target,
                               const std::vector<double>& storage_times,
                               const FidelityOptions& options = {});

}  // namespace photongen
