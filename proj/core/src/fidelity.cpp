#include "photongen/fidelity.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "photongen/constants.hpp"
#include "photongen/errors.hpp"
#include "photongen/parallel.hpp"

namespace photongen {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

using Eigen::MatrixXcd;

// Eigenvalues below this are rounding noise; their square roots would not be.
constexpr double kEigenFloor = 1e-10;

double floored_sqrt(double ev) { return ev < kEigenFloor ? 0.0 : std::sqrt(ev); }

// Hermitian square root with eigenvalues floored at zero.
MatrixXcd psd_sqrt(const MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) ev[k] = floored_sqrt(ev[k]);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

void check_density(const DensityMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::validation, "state_fidelity: density matrix must be square and non-empty");
  }
  const MatrixXcd full = m;
  if ((full - full.adjoint()).cwiseAbs().maxCoeff() > 1e-8) {
    throw Error(ErrorCode::validation, "state_fidelity: density matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(full, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8) {
    throw Error(ErrorCode::validation, "state_fidelity: density matrix is not positive semidefinite");
  }
}

double storage_flux(const Device& device, const FidelityOptions& o) {
  return o.storage_flux ? *o.storage_flux : device.decoupling_flux();
}

ControlFn fixed_controls(const Device& device, double flux) {
  Controls c;
  c.gamma_rad = device.emission_rate(flux);
  c.gammaphi_extra = device.transmon.gammaphi_flux.at(flux);
  return [c](double) { return c; };
}

// Boltzmann ladder at T_eff, p_{j+1} / p_j = nbar / (nbar + 1).
DensityMatrix thermal_state(const TransmonParams& params) {
  const int n = params.levels;
  const double nbar = params.thermal_occupation();
  const double ratio = nbar / (nbar + 1.0);
  DensityMatrix rho = DensityMatrix::Zero(n, n);
  double p = 1.0, sum = 0.0;
  for (int j = 0; j < n; ++j) {
    rho(j, j) = p;
    sum += p;
    p *= ratio;
  }
  return rho / sum;
}

// Thermal state at the storage point, then the calibrated pulse.
DensityMatrix prepare(const Device& device, TargetState target, const FidelityOptions& o) {
  const double phi = storage_flux(device, o);
  const double angle = target == TargetState::fock ? constants::pi : constants::pi / 2.0;
  const DrivePulse pulse = calibrated_pulse(device, phi, angle, 0.0, o.pulse);
  Controls base;
  base.gamma_rad = device.emission_rate(phi);
  base.gammaphi_extra = device.transmon.gammaphi_flux.at(phi);
  const ControlFn controls = [base, pulse](double t) {
    Controls c = base;
    c.drive = pulse.sample(t);
    return c;
  };
  SimulationOptions sim;
  sim.dt = o.dt;
  sim.record = false;
  return simulate(device.transmon, controls, thermal_state(device.transmon), 0.0,
                  pulse.end(), sim)
      .final_state;
}

// Storage at fixed flux with snapshots at the requested (sorted) times.
std::vector<DensityMatrix> store(const Device& device, const DensityMatrix& start,
                                 const std::vector<double>& times, const FidelityOptions& o) {
  if (times.empty()) return {};
  SimulationOptions sim;
  sim.dt = o.dt;
  sim.record = false;
  sim.snapshot_times = times;
  return simulate(device.transmon, fixed_controls(device, storage_flux(device, o)), start, 0.0,
                  times.back(), sim)
      .snapshots;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

Device channel_device(const Device& device, const std::string& channel) {
  Device d = device;
  auto& t = d.transmon;
  const auto& src = device.transmon;
  t.levels = 2;
  t.t_eff = 0.0;
  t.t_line = 0.0;
  t.gamma1_intrinsic = 0.0;
  t.gammaphi_intrinsic = 0.0;
  t.gamma_excitation_line = 0.0;
  for (double& v : t.gammaphi_flux.value) v = 0.0;
  if (channel == "thermal") {
    t.t_eff = src.t_eff;
    t.t_line = src.t_line;
  } else if (channel == "leakage") {
    t.levels = src.levels;
  } else if (channel == "intrinsic_decay") {
    t.gamma1_intrinsic = src.gamma1_intrinsic;
  } else if (channel == "dephasing") {
    t.gammaphi_intrinsic = src.gammaphi_intrinsic;
    t.gammaphi_flux = src.gammaphi_flux;
  } else if (channel == "parasitic") {
    t.gamma_excitation_line = src.gamma_excitation_line;
  }
  return d;
}

bool channel_active(const Device& device, const std::string& channel) {
  const auto& t = device.transmon;
  if (channel == "thermal") return t.t_eff > 0.0 || t.t_line > 0.0;
  if (channel == "leakage") return t.levels > 2;
  if (channel == "intrinsic_decay") return t.gamma1_intrinsic > 0.0;
  if (channel == "dephasing") return t.gammaphi_intrinsic > 0.0 || t.gammaphi_flux.max_value() > 0.0;
  if (channel == "parasitic") return t.gamma_excitation_line > 0.0;
  return false;
}

const std::vector<std::string> kChannels = {"thermal", "leakage", "intrinsic_decay", "dephasing",
                                            "parasitic"};

std::vector<double> emission_table(const Device& device, TargetState target,
                                   const std::vector<double>& storage_times, const FidelityOptions& o,
                                   double* prep_fidelity) {
  const DensityMatrix prep = prepare(device, target, o);
  const DensityMatrix goal = target_density(target, device.transmon.levels);
  if (prep_fidelity) *prep_fidelity = state_fidelity(prep, goal);
  const EmissionChannel channel = emission_channel(device, o);

  std::vector<std::size_t> order(storage_times.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return storage_times[a] < storage_times[b]; });
  std::vector<double> sorted;
  for (auto k : order) sorted.push_back(storage_times[k]);
  const auto states = store(device, prep, sorted, o);

  std::vector<double> out(storage_times.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    out[order[j]] = state_fidelity(photon_state(states[j], channel), goal);
  }
  return out;
}

}  // namespace

std::string to_string(TargetState target) {
  return target == TargetState::fock ? "fock" : "superposition";
}

TargetState target_from_string(const std::string& name) {
  if (name == "fock") return TargetState::fock;
  if (name == "superposition") return TargetState::superposition;
  throw Error(ErrorCode::invalid_argument, "unknown target state '" + name + "'");
}

DensityMatrix target_density(TargetState target, int levels) {
  require(levels >= 2 && levels <= kMaxLevels, "target_density: levels out of range");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(levels);
  if (target == TargetState::fock) {
    psi[1] = 1.0;
  } else {
    psi[0] = psi[1] = 1.0 / std::sqrt(2.0);
  }
  return pure_state(psi);
}

double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw Error(ErrorCode::validation, "state_fidelity: dimension mismatch");
  }
  check_density(rho);
  check_density(sigma);
  const MatrixXcd r = rho;
  const MatrixXcd s = sigma;
  const MatrixXcd sr = psd_sqrt(0.5 * (r + r.adjoint()));
  MatrixXcd inner = sr * s * sr;
  inner = 0.5 * (inner + inner.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(inner, Eigen::EigenvaluesOnly);
  double f = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    f += floored_sqrt(es.eigenvalues()[k]);
  }
  return std::clamp(f, 0.0, 1.0);
}

DensityMatrix prepared_state(const Device& device, TargetState target, const FidelityOptions& options) {
  device.validate();
  return prepare(device, target, options);
}

double preparation_fidelity(const Device& device, TargetState target, const FidelityOptions& options) {
  device.validate();
  require(device.transmon.levels >= 2, "preparation_fidelity: need at least two levels");
  return state_fidelity(prepare(device, target, options), target_density(target, device.transmon.levels));
}

EmissionChannel emission_channel(const Device& device, const FidelityOptions& o) {
  device.validate();
  require(o.flux_ramp > 0.0 && o.window_factor > 0.0 && o.record_interval > 0.0,
          "emission_channel: ramp, window and record interval must be positive");
  const double phi0 = storage_flux(device, o);
  const double phi1 = o.emit_flux;
  const double ramp = o.flux_ramp;
  const auto flux = [=](double t) { return t >= ramp ? phi1 : phi0 + (phi1 - phi0) * std::max(t, 0.0) / ramp; };
  const ControlFn controls = [&device, flux](double t) {
    const double phi = flux(t);
    Controls c;
    c.gamma_rad = device.emission_rate(phi);
    c.gammaphi_extra = device.transmon.gammaphi_flux.at(phi);
    return c;
  };

  const double gamma_emit = device.emission_rate(phi1);
  require(gamma_emit > 0.0, "emission_channel: no emission at the release flux");
  Controls at_emit;
  at_emit.gamma_rad = gamma_emit;
  const double window = o.window_factor / channel_rates(device.transmon, at_emit).total();

  const int n = device.transmon.levels;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
  psi[0] = psi[1] = 1.0 / std::sqrt(2.0);
  const DensityMatrix ref = pure_state(psi);

  SimulationOptions sim;
  sim.dt = o.dt;
  sim.record_interval = o.record_interval;
  sim.breakpoints = {ramp};
  const auto res = simulate(device.transmon, controls, ref, 0.0, ramp + window, sim, flux);
  const auto& rec = res.record;

  EmissionChannel out;
  out.background_power = gamma_emit * number_expectation(steady_state(device.transmon, gamma_emit));
  std::vector<double> signal(rec.size());
  for (std::size_t k = 0; k < rec.size(); ++k) signal[k] = std::max(0.0, rec.power[k] - out.background_power);

  Wavepacket packet;
  packet.t = rec.t;
  packet.amplitude.resize(rec.size());
  for (std::size_t k = 0; k < rec.size(); ++k) packet.amplitude[k] = std::sqrt(signal[k]);
  const double emitted = packet.norm();
  out.efficiency = std::clamp(emitted / number_expectation(ref), 0.0, 1.0);

  Complex overlap = 0.0;
  if (emitted > 0.0) {
    const double scale = 1.0 / std::sqrt(emitted);
    for (double& a : packet.amplitude) a *= scale;
    // sqrt(Gamma_1) <b> = (I - iQ) / 2.
    const auto field = [&rec](std::size_t k) {
      return 0.5 * Complex(rec.i_quadrature[k], -rec.q_quadrature[k]);
    };
    for (std::size_t k = 1; k < rec.size(); ++k) {
      const double h = rec.t[k] - rec.t[k - 1];
      overlap += 0.5 * h * (packet.amplitude[k] * field(k) + packet.amplitude[k - 1] * field(k - 1));
    }
  }
  out.coherence = std::clamp(std::abs(overlap) / std::abs(lowering_expectation(ref)), 0.0, 1.0);
  out.mode = std::move(packet);
  return out;
}

DensityMatrix photon_state(const DensityMatrix& rho, const EmissionChannel& channel) {
  const int n = static_cast<int>(rho.rows());
  const double eta = std::clamp(channel.efficiency, 0.0, 1.0);
  const double mismatch = eta > 0.0 ? std::clamp(channel.coherence / std::sqrt(eta), 0.0, 1.0) : 0.0;
  DensityMatrix out = DensityMatrix::Zero(n, n);
  for (int m = 0; m < n; ++m) {
    for (int l = 0; l < n; ++l) {
      Complex acc = 0.0;
      for (int k = 0; m + k < n && l + k < n; ++k) {
        acc += std::sqrt(binomial(m + k, k) * binomial(l + k, k)) * std::pow(eta, 0.5 * (m + l)) *
               std::pow(1.0 - eta, k) * rho(m + k, l + k);
      }
      out(m, l) = acc * std::pow(mismatch, std::abs(m - l));
    }
  }
  return out;
}

double emission_efficiency(const Device& device, TargetState target, double storage_time,
                           const FidelityOptions& options) {
  device.validate();
  require(storage_time >= 0.0 && std::isfinite(storage_time), "emission_efficiency: storage time must be >= 0");
  return emission_table(device, target, {storage_time}, options, nullptr).front();
}

LossBudget loss_budget(const Device& device, TargetState target, double storage_time,
                       const FidelityOptions& options) {
  device.validate();
  require(storage_time >= 0.0, "loss_budget: storage time must be >= 0");
  std::vector<std::string> active;
  for (const auto& c : kChannels) {
    if (channel_active(device, c)) active.push_back(c);
  }
  // Entry 0 is the full device, the rest one channel each.
  std::vector<double> fid(active.size() + 1, 1.0);
  parallel_for(fid.size(), options.threads, [&](std::size_t k) {
    const Device d = k == 0 ? device : channel_device(device, active[k - 1]);
    fid[k] = emission_table(d, target, {storage_time}, options, nullptr).front();
  });

  LossBudget out;
  out.total_deficit = active.empty() ? 0.0 : 1.0 - fid[0];
  double sum = 0.0;
  for (std::size_t k = 0; k < active.size(); ++k) {
    const double deficit = 1.0 - fid[k + 1];
    if (deficit < 1e-9) continue;
    out.items.push_back({active[k], deficit});
    sum += deficit;
  }
  out.remainder = out.total_deficit - sum;
  return out;
}

FidelityReport fidelity_report(const Device& device, TargetState target,
                               const std::vector<double>& storage_times, const FidelityOptions& options) {
  device.validate();
  require(!storage_times.empty(), "fidelity_report: need at least one storage time");
  for (double t : storage_times) require(t >= 0.0 && std::isfinite(t), "fidelity_report: storage times must be >= 0");
  FidelityReport out;
  out.target = target;
  out.storage_times = storage_times;
  out.emission_fidelity = emission_table(device, target, storage_times, options, &out.prep_fidelity);
  out.budget_storage_time = *std::max_element(storage_times.begin(), storage_times.end());
  out.budget = loss_budget(device, target, out.budget_storage_time, options);
  return out;
}

}  // namespace photongen
