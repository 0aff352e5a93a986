#include "photongen/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "photongen/errors.hpp"

namespace photongen {
namespace {

void fail(const std::string& what) { throw Error(ErrorCode::schedule, what); }

// Value of one segment at time t given the flux it departs from.
double segment_value(const FluxSegment& s, double base, double t) {
  if (t < s.start) return base;
  const double rise = s.ramp > 0.0 ? std::min(1.0, (t - s.start) / s.ramp) : 1.0;
  if (t <= s.end()) {
    if (s.shape == FluxShape::custom) {
      if (s.samples.size() == 1) return s.samples.front();
      const double pos = (t - s.start) / s.duration * static_cast<double>(s.samples.size() - 1);
      const auto k = std::min(static_cast<std::size_t>(pos), s.samples.size() - 2);
      const double frac = pos - static_cast<double>(k);
      return s.samples[k] + (s.samples[k + 1] - s.samples[k]) * frac;
    }
    return base + (s.level - base) * rise;
  }
  const double since = t - s.end();
  switch (s.shape) {
    case FluxShape::square: {
      if (s.ramp <= 0.0 || since >= s.ramp) return base;
      return base + (s.level - base) * (1.0 - since / s.ramp);
    }
    case FluxShape::exp_edge:
      return base + (s.level - base) * std::exp(-since / s.edge_time);
    case FluxShape::cubic_exp_edge: {
      const double u = since / s.edge_time;
      return base + (s.level - base) * std::exp(-u * u * u);
    }
    case FluxShape::custom:
      return base;
  }
  return base;
}

}  // namespace

double FluxSegment::settle_time() const {
  switch (shape) {
    case FluxShape::square: return ramp;
    case FluxShape::exp_edge: return 40.0 * edge_time;
    case FluxShape::cubic_exp_edge: return 4.0 * edge_time;
    case FluxShape::custom: return 0.0;
  }
  return 0.0;
}

void FluxSegment::validate() const {
  if (!std::isfinite(level) || !std::isfinite(start)) fail("flux segment: non-finite level or start");
  if (!(duration > 0.0) || !std::isfinite(duration)) fail("flux segment: duration must be positive");
  if (ramp < 0.0 || ramp > duration) fail("flux segment: ramp must lie in [0, duration]");
  if ((shape == FluxShape::exp_edge || shape == FluxShape::cubic_exp_edge) && !(edge_time > 0.0)) {
    fail("flux segment: exponential edges need a positive edge_time");
  }
  if (shape == FluxShape::custom) {
    if (samples.empty()) fail("flux segment: custom shape needs samples");
    for (double v : samples) {
      if (!std::isfinite(v)) fail("flux segment: non-finite sample");
    }
  }
}

void PulseSchedule::validate() const {
  if (!std::isfinite(idle_flux)) fail("schedule: idle flux must be finite");
  if (!std::isfinite(t_end) || t_end < 0.0) fail("schedule: t_end must be nonnegative");
  for (std::size_t k = 0; k < drive_segments.size(); ++k) {
    drive_segments[k].validate();
    if (drive_segments[k].start < 0.0) fail("schedule: drive pulse starts before t = 0");
    if (k > 0) {
      const DrivePulse& prev = drive_segments[k - 1];
      if (drive_segments[k].start < prev.start) fail("schedule: drive pulses not sorted by start");
      if (drive_segments[k].start < prev.end()) {
        fail("schedule: drive pulses " + std::to_string(k - 1) + " and " + std::to_string(k) +
             " overlap");
      }
    }
  }
  for (std::size_t k = 0; k < flux_segments.size(); ++k) {
    flux_segments[k].validate();
    if (flux_segments[k].start < 0.0) fail("schedule: flux segment starts before t = 0");
    if (k > 0) {
      const FluxSegment& prev = flux_segments[k - 1];
      if (flux_segments[k].start < prev.start) fail("schedule: flux segments not sorted by start");
      if (flux_segments[k].start < prev.end()) {
        fail("schedule: flux segments " + std::to_string(k - 1) + " and " + std::to_string(k) +
             " overlap");
      }
    }
  }
}

double PulseSchedule::duration() const {
  double end = t_end;
  for (const auto& p : drive_segments) end = std::max(end, p.end());
  for (const auto& s : flux_segments) end = std::max(end, s.end() + s.settle_time());
  return end;
}

double PulseSchedule::flux_at(double t) const {
  // The last segment that has started owns the flux; a later segment starts
  // from the idle flux even if an exponential tail is still decaying.
  const FluxSegment* active = nullptr;
  for (const auto& s : flux_segments) {
    if (s.start <= t) active = &s;
    else break;
  }
  if (active == nullptr) return idle_flux;
  return segment_value(*active, idle_flux, t);
}

DriveSample PulseSchedule::drive_at(double t) const {
  for (const auto& p : drive_segments) {
    if (t >= p.start && t <= p.end()) return p.sample(t);
    if (p.start > t) break;
  }
  return DriveSample{};
}

double PulseSchedule::max_drive() const {
  double m = 0.0;
  for (const auto& p : drive_segments) {
    double peak = std::abs(p.amplitude);
    if (p.shape == EnvelopeShape::custom) {
      double s = 0.0;
      for (double v : p.samples) s = std::max(s, std::abs(v));
      peak *= s;
    }
    m = std::max(m, peak);
  }
  return m;
}

std::vector<double> PulseSchedule::breakpoints() const {
  std::vector<double> b;
  for (const auto& p : drive_segments) {
    b.push_back(p.start);
    b.push_back(p.end());
  }
  for (const auto& s : flux_segments) {
    b.push_back(s.start);
    b.push_back(s.start + s.ramp);
    b.push_back(s.end());
    if (s.shape == FluxShape::square) b.push_back(s.end() + s.ramp);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

ControlFn schedule_controls(const Device& device, const PulseSchedule& schedule) {
  // Gamma_1(flux) is the expensive part; piecewise-constant flux repeats the
  // same argument many times in a row.
  struct Cache {
    double flux = std::nan("");
    double gamma = 0.0;
    double gammaphi = 0.0;
  };
  auto cache = std::make_shared<Cache>();
  return [device, schedule, cache](double t) {
    Controls c;
    c.drive = schedule.drive_at(t);
    const double phi = schedule.flux_at(t);
    if (phi != cache->flux) {
      cache->flux = phi;
      cache->gamma = device.emission_rate(phi);
      cache->gammaphi = device.transmon.gammaphi_flux.at(phi);
    }
    c.gamma_rad = cache->gamma;
    c.gammaphi_extra = cache->gammaphi;
    return c;
  };
}

SimulationResult run_schedule(const Device& device, const PulseSchedule& schedule,
                              const DensityMatrix& initial, const RunOptions& options) {
  device.validate();
  schedule.validate();
  SimulationOptions sim;
  sim.dt = options.dt;
  sim.record_interval = options.record_interval;
  sim.snapshot_times = options.snapshot_times;
  sim.breakpoints = schedule.breakpoints();
  sim.record = options.record;
  const double t1 = schedule.duration();
  const auto controls = schedule_controls(device, schedule);
  return simulate(device.transmon, controls, initial, 0.0, t1, sim,
                  [&schedule](double t) { return schedule.flux_at(t); });
}

}  // namespace photongen
