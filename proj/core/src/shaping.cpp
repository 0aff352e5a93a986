#include "photongen/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "photongen/constants.hpp"
#include "photongen/errors.hpp"

namespace photongen {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

double interp(const std::vector<double>& t, const std::vector<double>& y, double x) {
  if (x <= t.front()) return y.front();
  if (x >= t.back()) return y.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin());
  const double f = (x - t[k - 1]) / (t[k] - t[k - 1]);
  return y[k - 1] + f * (y[k] - y[k - 1]);
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = n == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return out;
}

double squared_norm(const std::vector<double>& t, const std::vector<double>& a) {
  double s = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    s += 0.5 * (t[k] - t[k - 1]) * (a[k] * a[k] + a[k - 1] * a[k - 1]);
  }
  return s;
}

}  // namespace

double Wavepacket::dt() const { return t.size() > 1 ? (t.back() - t.front()) / (t.size() - 1) : 0.0; }

double Wavepacket::norm() const { return squared_norm(t, amplitude); }

void Wavepacket::validate() const {
  require(t.size() >= 2 && t.size() == amplitude.size(), "wavepacket: need >= 2 samples of equal length");
  const double h = dt();
  require(h > 0.0, "wavepacket: time grid must increase");
  for (std::size_t k = 1; k < t.size(); ++k) {
    require(std::abs(t[k] - t[k - 1] - h) <= 1e-6 * h, "wavepacket: time grid must be uniform");
  }
  for (double a : amplitude) require(std::isfinite(a) && a >= 0.0, "wavepacket: amplitudes must be nonnegative");
  require(norm() <= 1.0 + 1e-9, "wavepacket: norm exceeds one photon");
}

Wavepacket Wavepacket::sample(const std::function<double(double)>& xi, double t0, double t1,
                              std::size_t points) {
  require(points >= 2 && t1 > t0, "wavepacket: bad sampling window");
  Wavepacket w;
  w.t = linspace(t0, t1, points);
  w.amplitude.reserve(points);
  for (double x : w.t) w.amplitude.push_back(xi(x));
  return w;
}

Wavepacket exponential_packet(double gamma, double t0, double t1, std::size_t points) {
  require(gamma >= 0.0, "exponential_packet: gamma must be nonnegative");
  return Wavepacket::sample(
      [gamma](double t) { return t < 0.0 ? 0.0 : std::sqrt(gamma) * std::exp(-0.5 * gamma * t); }, t0,
      t1, points);
}

Wavepacket sech_packet(double gamma, double tc, double t0, double t1, std::size_t points) {
  require(gamma > 0.0, "sech_packet: gamma must be positive");
  return Wavepacket::sample(
      [gamma, tc](double t) { return std::sqrt(gamma / 4.0) / std::cosh(0.5 * gamma * (t - tc)); }, t0,
      t1, points);
}

Wavepacket rising_packet(double gamma, double t0, double t1, std::size_t points) {
  require(gamma >= 0.0, "rising_packet: gamma must be nonnegative");
  return Wavepacket::sample(
      [gamma, t1](double t) { return std::sqrt(gamma) * std::exp(-0.5 * gamma * (t1 - t)); }, t0, t1,
      points);
}

double RateProfile::at(double time) const { return t.empty() ? 0.0 : interp(t, gamma, time); }

RateProfile rate_from_target(const Wavepacket& target, double gamma_max, double clamp_threshold) {
  target.validate();
  require(gamma_max > 0.0, "rate_from_target: gamma_max must be positive");
  require(clamp_threshold >= 0.0, "rate_from_target: threshold must be nonnegative");

  RateProfile out;
  out.t = target.t;
  out.gamma.resize(target.size());
  const auto& a = target.amplitude;
  const double h = target.dt();
  const double total = target.norm();
  double emitted = 0.0, clamped = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    if (k > 0) emitted += 0.5 * h * (a[k] * a[k] + a[k - 1] * a[k - 1]);
    const double flux = a[k] * a[k];
    const double left = 1.0 - emitted;
    double g = flux == 0.0 ? 0.0 : (left > 0.0 ? flux / left : gamma_max * 2.0);
    if (g > gamma_max) {
      g = gamma_max;
      const double w = (k == 0 || k + 1 == target.size()) ? 0.5 * h : h;
      clamped += w * flux;
    }
    out.gamma[k] = g;
  }
  out.clamped_fraction = total > 0.0 ? clamped / total : 0.0;
  if (out.clamped_fraction > clamp_threshold) {
    throw Error(ErrorCode::infeasible_target,
                "rate_from_target: " + std::to_string(100.0 * out.clamped_fraction) +
                    "% of the target energy exceeds the maximal emission rate");
  }
  return out;
}

BranchBounds branch_bounds(const Device& device, Branch branch) {
  device.validate();
  const auto zeros = device.emission_zeros();
  require(!zeros.empty(), "branch_bounds: the emission rate has no decoupling point");
  const double lo = zeros.back() - 1.0;
  const double hi = zeros.front();

  // Maximum of the lobe around integer flux: grid, then golden section.
  const int n = 4000;
  double best = lo, best_rate = -1.0;
  for (int k = 0; k <= n; ++k) {
    const double phi = lo + (hi - lo) * k / n;
    const double r = device.emission_rate(phi);
    if (r > best_rate) {
      best_rate = r;
      best = phi;
    }
  }
  const double step = (hi - lo) / n;
  double a = std::max(lo, best - step), b = std::min(hi, best + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = device.emission_rate(x1), f2 = device.emission_rate(x2);
  while (b - a > 1e-13) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2; x2 = a + g * (b - a); f2 = device.emission_rate(x2);
    } else {
      b = x2; x2 = x1; f2 = f1; x1 = b - g * (b - a); f1 = device.emission_rate(x1);
    }
  }
  BranchBounds out;
  out.peak_flux = 0.5 * (a + b);
  out.peak_rate = std::max(best_rate, device.emission_rate(out.peak_flux));
  out.zero_flux = branch == Branch::positive ? hi : lo;

  // The bisection inverse relies on strict monotonicity.
  const int m = 2000;
  double prev = out.peak_rate;
  for (int k = 1; k <= m; ++k) {
    const double phi = out.peak_flux + (out.zero_flux - out.peak_flux) * k / m;
    const double r = device.emission_rate(phi);
    if (r > prev + 1e-12 * out.peak_rate) {
      throw Error(ErrorCode::invalid_argument, "branch_bounds: emission rate is not monotonic on the branch");
    }
    prev = r;
  }
  return out;
}

double flux_for_rate(const Device& device, double rate, const BranchBounds& bounds) {
  if (!(rate >= 0.0) || rate > bounds.peak_rate * (1.0 + 1e-12)) {
    throw Error(ErrorCode::out_of_range, "flux_for_rate: rate outside [0, branch maximum]");
  }
  if (rate >= bounds.peak_rate) return bounds.peak_flux;
  if (rate == 0.0) return bounds.zero_flux;
  // Invariant: rate(near) >= target >= rate(far).
  double near = bounds.peak_flux, far = bounds.zero_flux;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (near + far);
    if (mid == near || mid == far) break;
    if (device.emission_rate(mid) >= rate) near = mid;
    else far = mid;
  }
  return 0.5 * (near + far);
}

double FluxTrajectory::flux_at(double time) const { return interp(t, flux, time); }

void FluxTrajectory::validate() const {
  require(!t.empty() && t.size() == flux.size() && t.size() == current.size(),
          "flux trajectory: arrays must be non-empty and of equal length");
  for (std::size_t k = 1; k < t.size(); ++k) require(t[k] > t[k - 1], "flux trajectory: time must increase");
}

FluxTrajectory make_trajectory(const Device& device, std::vector<double> t, std::vector<double> flux) {
  FluxTrajectory out;
  out.t = std::move(t);
  out.flux = std::move(flux);
  out.mutual_inductance = device.squid.mutual;
  out.current.reserve(out.flux.size());
  for (double phi : out.flux) {
    out.current.push_back(out.mutual_inductance > 0.0 ? phi * constants::flux_quantum / out.mutual_inductance
                                                      : 0.0);
  }
  out.validate();
  return out;
}

FluxTrajectory flux_from_rate(const RateProfile& rate, const Device& device, Branch branch) {
  require(!rate.t.empty() && rate.t.size() == rate.gamma.size(), "flux_from_rate: empty rate profile");
  const BranchBounds bounds = branch_bounds(device, branch);
  std::vector<double> flux;
  flux.reserve(rate.gamma.size());
  for (double g : rate.gamma) flux.push_back(flux_for_rate(device, g, bounds));
  return make_trajectory(device, rate.t, std::move(flux));
}

FluxTrajectory emulate_paper_edges(const Device& device, const EdgeParams& p) {
  device.validate();
  require(p.duration > 0.0 && p.dt > 0.0 && p.hold >= 0.0 && p.ramp > 0.0,
          "emulate_paper_edges: durations must be positive");
  require(p.shape != FluxShape::custom, "emulate_paper_edges: custom shapes come from flux_from_rate");
  FluxSegment seg;
  seg.shape = p.shape;
  seg.level = p.storage_flux ? *p.storage_flux : device.decoupling_flux();
  seg.ramp = p.ramp;
  seg.start = 0.0;
  seg.duration = p.hold + p.ramp;
  seg.edge_time = p.edge_time > 0.0 ? p.edge_time : (p.shape == FluxShape::cubic_exp_edge ? 800e-9 : 300e-9);
  PulseSchedule s;
  s.idle_flux = p.emit_flux;
  s.flux_segments.push_back(seg);
  s.validate();

  const auto n = static_cast<std::size_t>(std::floor(p.duration / p.dt + 1e-9)) + 1;
  std::vector<double> t(n), flux(n);
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = static_cast<double>(k) * p.dt;
    flux[k] = s.flux_at(t[k] + p.ramp);  // skip the rising edge
  }
  return make_trajectory(device, std::move(t), std::move(flux));
}

double rise_fall_ratio(const Wavepacket& packet) {
  const auto& a = packet.amplitude;
  if (a.empty()) return 0.0;
  const auto peak = static_cast<std::size_t>(std::max_element(a.begin(), a.end()) - a.begin());
  if (a[peak] <= 0.0) return 0.0;
  const double level = a[peak] / std::sqrt(2.0);
  std::size_t lo = peak, hi = peak;
  while (lo > 0 && a[lo] > level) --lo;
  while (hi + 1 < a.size() && a[hi] > level) ++hi;
  const double fall = packet.t[hi] - packet.t[peak];
  return fall > 0.0 ? (packet.t[peak] - packet.t[lo]) / fall : 0.0;
}

ControlFn trajectory_controls(const Device& device, const FluxTrajectory& trajectory) {
  struct Cache {
    double flux = std::nan("");
    double gamma = 0.0;
    double gammaphi = 0.0;
  };
  auto cache = std::make_shared<Cache>();
  return [device, trajectory, cache](double t) {
    const double phi = trajectory.flux_at(t);
    if (phi != cache->flux) {
      cache->flux = phi;
      cache->gamma = device.emission_rate(phi);
      cache->gammaphi = device.transmon.gammaphi_flux.at(phi);
    }
    Controls c;
    c.gamma_rad = cache->gamma;
    c.gammaphi_extra = cache->gammaphi;
    return c;
  };
}

ShapeVerification verify_shape(const FluxTrajectory& trajectory, const Wavepacket& target,
                               const Device& device, double dt) {
  trajectory.validate();
  target.validate();
  device.validate();

  SimulationOptions sim;
  sim.dt = dt;
  sim.record_interval = target.dt();
  const auto res = simulate(device.transmon, trajectory_controls(device, trajectory),
                            fock_state(device.transmon.levels, 1), target.t.front(), target.t.back(), sim,
                            [&trajectory](double t) { return trajectory.flux_at(t); });

  ShapeVerification out;
  out.record = res.record;
  out.intrinsic_loss = res.record.intrinsic_photons;
  out.achieved.t = target.t;
  out.achieved.phase = target.phase;
  out.achieved.amplitude.reserve(target.size());
  std::vector<double> root(res.record.size());
  for (std::size_t k = 0; k < root.size(); ++k) root[k] = std::sqrt(std::max(0.0, res.record.power[k]));
  for (double x : target.t) out.achieved.amplitude.push_back(interp(res.record.t, root, x));
  out.achieved_norm = out.achieved.norm();

  std::vector<double> diff(target.size());
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = out.achieved.amplitude[k] - target.amplitude[k];
  const double target_norm = target.norm();
  const double err = std::sqrt(squared_norm(target.t, diff));
  out.l2_error = target_norm > 0.0 ? err / std::sqrt(target_norm) : err;
  return out;
}

Device ideal_emitter(Device device) {
  auto& t = device.transmon;
  t.gamma1_intrinsic = 0.0;
  t.gammaphi_intrinsic = 0.0;
  t.gamma_excitation_line = 0.0;
  t.t_eff = 0.0;
  t.t_line = 0.0;
  for (double& v : t.gammaphi_flux.value) v = 0.0;
  return device;
}

}  // namespace photongen
