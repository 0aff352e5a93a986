#include "photongen/transmon_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "photongen/constants.hpp"
#include "photongen/errors.hpp"

namespace photongen {
namespace {

constexpr double kMaxStep = 1e-9;
constexpr double kMaxSteps = 1e9;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

double bose(double omega, double temperature) {
  if (temperature <= 0.0) return 0.0;
  const double x = constants::hbar * omega / (constants::boltzmann * temperature);
  return 1.0 / std::expm1(x);
}

double wrap_unit(double phi) {
  double w = phi - std::floor(phi);
  if (w >= 1.0) w = 0.0;
  return w;
}

}  // namespace

double FluxTable::at(double phi) const {
  if (flux.empty()) return 0.0;
  if (flux.size() == 1) return value.front();
  // Periodic extension: the point after the last entry is the first entry
  // shifted by one period.
  const double w = wrap_unit(phi);
  const double base = flux.front();
  double x = w;
  if (x < base) x += 1.0;
  const auto it = std::upper_bound(flux.begin(), flux.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - flux.begin());
  double x0, x1, y0, y1;
  if (hi == flux.size()) {
    x0 = flux.back();
    y0 = value.back();
    x1 = flux.front() + 1.0;
    y1 = value.front();
  } else {
    x0 = flux[hi - 1];
    y0 = value[hi - 1];
    x1 = flux[hi];
    y1 = value[hi];
  }
  if (x1 <= x0) return y0;
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

double FluxTable::max_value() const {
  return value.empty() ? 0.0 : *std::max_element(value.begin(), value.end());
}

void FluxTable::validate() const {
  require(flux.size() == value.size(), "gammaphi_flux: flux and value lengths differ");
  for (std::size_t k = 0; k < flux.size(); ++k) {
    require(std::isfinite(flux[k]) && std::isfinite(value[k]) && value[k] >= 0.0,
            "gammaphi_flux: entries must be finite and rates nonnegative");
    if (k > 0) require(flux[k] > flux[k - 1], "gammaphi_flux: flux must increase");
  }
  if (!flux.empty()) {
    require(flux.back() - flux.front() <= 1.0, "gammaphi_flux: table spans more than one period");
  }
}

void TransmonParams::validate() const {
  require(std::isfinite(omega01) && omega01 > 0.0, "transmon: omega01 must be positive");
  require(std::isfinite(alpha), "transmon: alpha must be finite");
  require(levels >= 2 && levels <= kMaxLevels,
          "transmon: levels must be between 2 and " + std::to_string(kMaxLevels));
  require(gamma1_intrinsic >= 0.0 && gammaphi_intrinsic >= 0.0 && gamma_excitation_line >= 0.0,
          "transmon: rates must be nonnegative");
  require(t_eff >= 0.0 && t_line >= 0.0, "transmon: temperatures must be nonnegative");
  gammaphi_flux.validate();
}

double TransmonParams::thermal_occupation() const { return bose(omega01, t_eff); }

double TransmonParams::line_occupation() const { return bose(omega01, t_line); }

double DrivePulse::envelope(double t) const {
  if (t < start || t > end() || duration <= 0.0) return 0.0;
  switch (shape) {
    case EnvelopeShape::square:
      return amplitude;
    case EnvelopeShape::gaussian: {
      const double s = sigma > 0.0 ? sigma : duration / 4.0;
      const double u = (t - start - 0.5 * duration) / s;
      return amplitude * std::exp(-0.5 * u * u);
    }
    case EnvelopeShape::custom: {
      if (samples.empty()) return 0.0;
      if (samples.size() == 1) return amplitude * samples.front();
      const double pos = (t - start) / duration * static_cast<double>(samples.size() - 1);
      const auto k = std::min(static_cast<std::size_t>(pos), samples.size() - 2);
      const double frac = pos - static_cast<double>(k);
      return amplitude * (samples[k] + (samples[k + 1] - samples[k]) * frac);
    }
  }
  return 0.0;
}

DriveSample DrivePulse::sample(double t) const {
  return DriveSample{envelope(t), phase, carrier_detuning};
}

void DrivePulse::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorCode::schedule, "drive pulse: duration must be positive");
  }
  if (!std::isfinite(start) || !std::isfinite(amplitude) || !std::isfinite(phase) ||
      !std::isfinite(carrier_detuning) || sigma < 0.0) {
    throw Error(ErrorCode::schedule, "drive pulse: non-finite field");
  }
  if (shape == EnvelopeShape::custom && samples.empty()) {
    throw Error(ErrorCode::schedule, "drive pulse: custom envelope needs samples");
  }
}

ChannelRates channel_rates(const TransmonParams& params, const Controls& controls) {
  const double nbar = params.thermal_occupation();
  const double nline = params.line_occupation();
  const double intrinsic = params.gamma1_intrinsic + params.gamma_excitation_line;
  ChannelRates r;
  r.down = controls.gamma_rad * (nline + 1.0) + intrinsic * (nbar + 1.0);
  r.up = controls.gamma_rad * nline + intrinsic * nbar;
  r.dephasing = params.gammaphi_intrinsic + controls.gammaphi_extra;
  return r;
}

Matrix build_hamiltonian(const TransmonParams& params, const DriveSample& drive) {
  const int n = params.levels;
  Matrix h = Matrix::Zero(n, n);
  const Complex coupling = 0.5 * drive.rabi * std::polar(1.0, drive.phase);
  for (int j = 0; j < n; ++j) {
    h(j, j) = j * drive.detuning + 0.5 * params.alpha * j * (j - 1);
    if (j + 1 < n) {
      const double s = std::sqrt(static_cast<double>(j + 1));
      h(j + 1, j) = coupling * s;
      h(j, j + 1) = std::conj(coupling) * s;
    }
  }
  return h;
}

Matrix build_hamiltonian(const TransmonParams& params, const DrivePulse& drive, double t) {
  return build_hamiltonian(params, drive.sample(t));
}

Matrix lowering_operator(int levels) {
  Matrix b = Matrix::Zero(levels, levels);
  for (int j = 1; j < levels; ++j) b(j - 1, j) = std::sqrt(static_cast<double>(j));
  return b;
}

double max_stable_step(const TransmonParams& params, const Controls& controls) {
  double lo = 0.0, hi = 0.0;
  for (int j = 0; j < params.levels; ++j) {
    const double e = j * controls.drive.detuning + 0.5 * params.alpha * j * (j - 1);
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  const double scale = std::max(
      {std::abs(controls.drive.rabi), hi - lo, channel_rates(params, controls).total()});
  if (scale <= 0.0) return kMaxStep;
  return std::min(0.01 / scale, kMaxStep);
}

void lindblad_rhs(const TransmonParams& params, const Controls& controls,
                  const DensityMatrix& rho, DensityMatrix& out) {
  const int n = params.levels;
  const ChannelRates rates = channel_rates(params, controls);
  const DriveSample& d = controls.drive;
  const Complex g = 0.5 * d.rabi * std::polar(1.0, d.phase);  // H(j+1, j) / sqrt(j+1)
  const Complex gc = std::conj(g);

  double sq[kMaxLevels + 1];
  double diag[kMaxLevels];
  double bbdag[kMaxLevels];
  for (int j = 0; j <= n; ++j) sq[j] = std::sqrt(static_cast<double>(j));
  for (int j = 0; j < n; ++j) {
    diag[j] = j * d.detuning + 0.5 * params.alpha * j * (j - 1);
    bbdag[j] = (j + 1 < n) ? static_cast<double>(j + 1) : 0.0;
  }

  out.resize(n, n);
  const Complex minus_i(0.0, -1.0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      // -i [H, rho]_{jk} with H tridiagonal.
      Complex hr = diag[j] * rho(j, k);
      if (j > 0) hr += g * sq[j] * rho(j - 1, k);
      if (j + 1 < n) hr += gc * sq[j + 1] * rho(j + 1, k);
      Complex rh = rho(j, k) * diag[k];
      if (k > 0) rh += rho(j, k - 1) * gc * sq[k];
      if (k + 1 < n) rh += rho(j, k + 1) * g * sq[k + 1];
      Complex v = minus_i * (hr - rh);

      // D[b]: b rho b^dag - {b^dag b, rho} / 2
      if (j + 1 < n && k + 1 < n) v += rates.down * sq[j + 1] * sq[k + 1] * rho(j + 1, k + 1);
      v -= 0.5 * rates.down * static_cast<double>(j + k) * rho(j, k);
      // D[b^dag]: b^dag rho b - {b b^dag, rho} / 2, with the truncated b b^dag
      if (j > 0 && k > 0) v += rates.up * sq[j] * sq[k] * rho(j - 1, k - 1);
      v -= 0.5 * rates.up * (bbdag[j] + bbdag[k]) * rho(j, k);
      // 2 Gamma_phi D[n]
      const double dn = static_cast<double>(j - k);
      v -= rates.dephasing * dn * dn * rho(j, k);
      out(j, k) = v;
    }
  }
}

DensityMatrix lindblad_step(const DensityMatrix& rho, const TransmonParams& params,
                            const ControlFn& controls, double t, double dt) {
  const Controls c1 = controls(t);
  const Controls c2 = controls(t + 0.5 * dt);
  const Controls c4 = controls(t + dt);
  const double bound = std::min({max_stable_step(params, c1), max_stable_step(params, c2),
                                 max_stable_step(params, c4)});
  if (!(dt > 0.0) || dt > bound * (1.0 + 1e-9)) {
    throw Error(ErrorCode::step_size, "step " + std::to_string(dt) +
                                          " s outside the stability bound " +
                                          std::to_string(bound) + " s");
  }
  DensityMatrix k1, k2, k3, k4, tmp;
  lindblad_rhs(params, c1, rho, k1);
  tmp = rho + (0.5 * dt) * k1;
  lindblad_rhs(params, c2, tmp, k2);
  tmp = rho + (0.5 * dt) * k2;
  lindblad_rhs(params, c2, tmp, k3);
  tmp = rho + dt * k3;
  lindblad_rhs(params, c4, tmp, k4);
  return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

DensityMatrix lindblad_step(const DensityMatrix& rho, const TransmonParams& params,
                            const DrivePulse& drive,
                            const std::function<double(double)>& gamma1_of_t, double t,
                            double dt) {
  const ControlFn controls = [&](double s) {
    Controls c;
    c.drive = drive.sample(s);
    c.gamma_rad = gamma1_of_t ? gamma1_of_t(s) : 0.0;
    return c;
  };
  return lindblad_step(rho, params, controls, t, dt);
}

Complex lowering_expectation(const DensityMatrix& rho) {
  Complex b = 0.0;
  for (int k = 1; k < rho.rows(); ++k) b += std::sqrt(static_cast<double>(k)) * rho(k, k - 1);
  return b;
}

double number_expectation(const DensityMatrix& rho) {
  double n = 0.0;
  for (int k = 1; k < rho.rows(); ++k) n += k * rho(k, k).real();
  return n;
}

OutputMoments output_moments(const DensityMatrix& rho, double gamma1_now) {
  if (gamma1_now < 0.0) throw Error(ErrorCode::invalid_argument, "negative decay rate");
  const Complex b = lowering_expectation(rho);
  const double amp = std::sqrt(gamma1_now);
  OutputMoments m;
  m.i = amp * 2.0 * b.real();
  m.q = -amp * 2.0 * b.imag();
  m.power = std::max(0.0, gamma1_now * number_expectation(rho));
  return m;
}

DensityMatrix ground_state(int levels) { return fock_state(levels, 0); }

DensityMatrix fock_state(int levels, int n) {
  require(levels >= 1 && levels <= kMaxLevels && n >= 0 && n < levels, "fock_state: bad level");
  DensityMatrix rho = DensityMatrix::Zero(levels, levels);
  rho(n, n) = 1.0;
  return rho;
}

DensityMatrix pure_state(const Eigen::VectorXcd& psi) {
  require(psi.size() >= 1 && psi.size() <= kMaxLevels, "pure_state: bad dimension");
  const double norm = psi.norm();
  require(norm > 0.0, "pure_state: zero vector");
  const Eigen::VectorXcd v = psi / norm;
  return v * v.adjoint();
}

DensityMatrix steady_state(const TransmonParams& params, double gamma_rad) {
  Controls c;
  c.gamma_rad = gamma_rad;
  const ChannelRates r = channel_rates(params, c);
  const int n = params.levels;
  DensityMatrix rho = DensityMatrix::Zero(n, n);
  if (r.up <= 0.0 || r.down <= 0.0) {
    rho(0, 0) = 1.0;
    return rho;
  }
  const double ratio = r.up / r.down;
  double p = 1.0, sum = 0.0;
  for (int j = 0; j < n; ++j) {
    rho(j, j) = p;
    sum += p;
    p *= ratio;
  }
  return rho / sum;
}

void EmissionRecord::reserve(std::size_t n, int levels) {
  t.reserve(n);
  i_quadrature.reserve(n);
  q_quadrature.reserve(n);
  power.reserve(n);
  gamma1_trace.reserve(n);
  flux.reserve(n);
  lowering.reserve(n);
  emitted.reserve(n);
  populations.assign(static_cast<std::size_t>(levels), {});
  for (auto& p : populations) p.reserve(n);
}

double rotate_to_i(EmissionRecord& record) {
  Complex sum = 0.0;
  for (std::size_t k = 0; k < record.size(); ++k) {
    sum += Complex(record.i_quadrature[k], record.q_quadrature[k]);
  }
  if (std::abs(sum) == 0.0) return 0.0;
  const double angle = -std::arg(sum);
  const Complex rot = std::polar(1.0, angle);
  for (std::size_t k = 0; k < record.size(); ++k) {
    const Complex z = Complex(record.i_quadrature[k], record.q_quadrature[k]) * rot;
    record.i_quadrature[k] = z.real();
    record.q_quadrature[k] = z.imag();
  }
  return angle;
}

SimulationResult simulate(const TransmonParams& params, const ControlFn& controls,
                          const DensityMatrix& initial, double t0, double t1,
                          const SimulationOptions& options,
                          const std::function<double(double)>& flux_of_t) {
  params.validate();
  require(initial.rows() == params.levels && initial.cols() == params.levels,
          "simulate: initial state has the wrong dimension");
  require(std::isfinite(t0) && std::isfinite(t1) && t1 >= t0, "simulate: bad time window");
  require(options.record_interval > 0.0, "simulate: record_interval must be positive");
  require(options.dt >= 0.0, "simulate: dt must be nonnegative");

  // Every recorded sample, snapshot and control kink is a grid node; each
  // interval between nodes is split into equal steps no larger than the
  // stability bound (or the fixed dt).
  std::vector<double> nodes;
  const auto n_rec = static_cast<std::size_t>(std::floor((t1 - t0) / options.record_interval + 1e-9));
  nodes.reserve(n_rec + 2 + options.snapshot_times.size() + options.breakpoints.size());
  for (std::size_t k = 0; k <= n_rec; ++k) nodes.push_back(t0 + k * options.record_interval);
  nodes.push_back(t1);
  for (double s : options.snapshot_times) {
    require(s >= t0 && s <= t1, "simulate: snapshot outside the time window");
    nodes.push_back(s);
  }
  for (double b : options.breakpoints) {
    if (b > t0 && b < t1) nodes.push_back(b);
  }
  std::sort(nodes.begin(), nodes.end());
  // Merge nodes closer than a femtosecond; they only produce degenerate steps.
  std::vector<double> grid;
  grid.reserve(nodes.size());
  for (double x : nodes) {
    if (grid.empty() || x - grid.back() > 1e-15) grid.push_back(x);
  }
  if (grid.size() > 1 && grid.back() < t1) grid.back() = t1;

  const auto is_record_node = [&](double x) {
    const double pos = (x - t0) / options.record_interval;
    return std::abs(pos - std::round(pos)) < 1e-6 || x == t1;
  };

  SimulationResult result;
  EmissionRecord& rec = result.record;
  if (options.record) rec.reserve(n_rec + 2, params.levels);
  result.snapshots.resize(options.snapshot_times.size());

  DensityMatrix rho = initial;
  const double intrinsic = params.gamma1_intrinsic + params.gamma_excitation_line;

  auto push_sample = [&](double t, const Controls& c) {
    if (!options.record) return;
    const OutputMoments m = output_moments(rho, c.gamma_rad);
    rec.t.push_back(t);
    rec.i_quadrature.push_back(m.i);
    rec.q_quadrature.push_back(m.q);
    rec.power.push_back(m.power);
    rec.gamma1_trace.push_back(c.gamma_rad);
    rec.flux.push_back(flux_of_t ? flux_of_t(t) : 0.0);
    rec.lowering.push_back(lowering_expectation(rho));
    rec.emitted.push_back(rec.emitted_photons);
    for (int j = 0; j < params.levels; ++j) rec.populations[j].push_back(rho(j, j).real());
  };
  auto take_snapshots = [&](double t) {
    for (std::size_t s = 0; s < options.snapshot_times.size(); ++s) {
      if (std::abs(options.snapshot_times[s] - t) <= 1e-15) result.snapshots[s] = rho;
    }
  };

  Controls c_now = controls(t0);
  push_sample(t0, c_now);
  take_snapshots(t0);
  double n_now = number_expectation(rho);

  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double a = grid[g - 1];
    const double b = grid[g];
    double h;
    if (options.dt > 0.0) {
      h = options.dt;
    } else {
      const Controls cm = controls(0.5 * (a + b));
      h = std::min({max_stable_step(params, c_now), max_stable_step(params, cm),
                    max_stable_step(params, controls(b))});
    }
    const double n_steps = std::ceil((b - a) / h - 1e-9);
    if (!(n_steps <= kMaxSteps)) {
      throw Error(ErrorCode::invalid_argument, "simulate: the time window needs more than 1e9 steps");
    }
    const long long steps = std::max(1LL, static_cast<long long>(n_steps));
    const double dt = (b - a) / static_cast<double>(steps);
    double t = a;
    for (long long s = 0; s < steps; ++s) {
      const double tn = (s + 1 == steps) ? b : a + static_cast<double>(s + 1) * dt;
      const double step = tn - t;
      rho = lindblad_step(rho, params, controls, t, step);
      const Controls c_next = controls(tn);
      const double n_next = number_expectation(rho);
      rec.emitted_photons += 0.5 * step * (c_now.gamma_rad * n_now + c_next.gamma_rad * n_next);
      rec.intrinsic_photons += 0.5 * step * intrinsic * (n_now + n_next);
      ++rec.steps;
      c_now = c_next;
      n_now = n_next;
      t = tn;
    }
    if (is_record_node(b)) push_sample(b, c_now);
    take_snapshots(b);
  }
  result.final_state = rho;
  return result;
}

}  // namespace photongen
