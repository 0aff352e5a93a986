#include "photongen/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "photongen/constants.hpp"
#include "photongen/errors.hpp"
#include "photongen/parallel.hpp"

namespace photongen {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Default analysis windows are a multiple of 1 / Gamma_2, capped for
// (nearly) decoherence-free devices.
constexpr double kMaxDefaultWindow = 20e-6;
constexpr double kUnresolvedDecay = 100.0;
constexpr double kUnresolvedDrop = 0.05;

double default_window(double multiple, double gamma2) {
  return gamma2 > 0.0 ? std::min(multiple / gamma2, kMaxDefaultWindow) : kMaxDefaultWindow;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

ControlFn fixed_flux_controls(const Device& device, double flux, const DriveSample& drive) {
  Controls c;
  c.drive = drive;
  c.gamma_rad = device.emission_rate(flux);
  c.gammaphi_extra = device.transmon.gammaphi_flux.at(flux);
  return [c](double) { return c; };
}

ControlFn fixed_flux_controls(const Device& device, double flux, const DrivePulse& pulse) {
  Controls base;
  base.gamma_rad = device.emission_rate(flux);
  base.gammaphi_extra = device.transmon.gammaphi_flux.at(flux);
  return [base, pulse](double t) {
    Controls c = base;
    c.drive = pulse.sample(t);
    return c;
  };
}

double envelope_area(const DrivePulse& unit) {
  // Simpson on a fine grid; the envelope is smooth inside the window.
  const int n = 2000;
  const double h = unit.duration / n;
  double sum = unit.envelope(unit.start) + unit.envelope(unit.end());
  for (int k = 1; k < n; ++k) {
    sum += (k % 2 ? 4.0 : 2.0) * unit.envelope(unit.start + k * h);
  }
  return sum * h / 3.0;
}

DrivePulse gaussian_pulse(const PulseShape& shape, double amplitude, double start) {
  DrivePulse p;
  p.shape = EnvelopeShape::gaussian;
  p.amplitude = amplitude;
  p.start = start;
  p.duration = shape.duration;
  p.sigma = shape.sigma;
  p.phase = constants::pi / 2.0;
  return p;
}

// Principal axis of a set of complex samples: the angle that maximizes the
// summed squared real part after rotation.
double principal_rotation(const std::vector<Complex>& z) {
  Complex s2 = 0.0;
  for (const auto& v : z) s2 += v * v;
  return -0.5 * std::arg(s2);
}

std::optional<FigureOfMerit> time_figure(const std::string& name, const FitResult& fit, double w0,
                                         double w1) {
  if (fit.degenerate || !std::isfinite(fit.value("tau"))) return std::nullopt;
  return FigureOfMerit{name, fit.value("tau"), fit.uncertainty("tau"), w0, w1};
}

// False when nothing resolvable decayed: the fit is flat, its time is far
// beyond the window, or the curve barely changed from start to end.
bool resolved_decay(const std::vector<double>& y, const FitResult& fit, double window) {
  if (y.empty() || fit.degenerate) return false;
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  if (!(std::abs(y.front() - y.back()) > kUnresolvedDrop * peak)) return false;
  return fit.value("tau") < kUnresolvedDecay * window;
}

double interpolate(const std::vector<double>& t, const std::vector<double>& y, double x) {
  if (t.empty()) return 0.0;
  if (x <= t.front()) return y.front();
  if (x >= t.back()) return y.back();
  const auto it = std::upper_bound(t.begin(), t.end(), x);
  const auto k = static_cast<std::size_t>(it - t.begin());
  const double f = (x - t[k - 1]) / (t[k] - t[k - 1]);
  return y[k - 1] + f * (y[k] - y[k - 1]);
}

}  // namespace

double calibrate_amplitude(const Device& device, double flux, double angle, const PulseShape& shape) {
  device.validate();
  require(angle > 0.0 && angle <= constants::pi, "calibrate_amplitude: angle must be in (0, pi]");
  require(shape.duration > 0.0 && shape.sigma > 0.0, "calibrate_amplitude: bad pulse shape");

  const double ideal = angle / envelope_area(gaussian_pulse(shape, 1.0, 0.0));
  const DensityMatrix start = ground_state(device.transmon.levels);
  SimulationOptions sim;
  sim.record = false;

  const auto score = [&](double amplitude) {
    const DrivePulse p = gaussian_pulse(shape, amplitude, 0.0);
    const auto res = simulate(device.transmon, fixed_flux_controls(device, flux, p), start, 0.0,
                              shape.duration, sim);
    if (angle < constants::pi) return std::abs(lowering_expectation(res.final_state));
    return res.final_state(1, 1).real();
  };

  // Golden-section search for the maximum around the ideal area.
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.6 * ideal, b = 1.4 * ideal;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = score(x1), f2 = score(x2);
  while (b - a > 1e-7 * ideal) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = score(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = score(x1);
    }
  }
  return 0.5 * (a + b);
}

DrivePulse calibrated_pulse(const Device& device, double flux, double angle, double start,
                            const PulseShape& shape) {
  return gaussian_pulse(shape, calibrate_amplitude(device, flux, angle, shape), start);
}

TwoLevelRates two_level_rates(const Device& device, double flux) {
  Controls c;
  c.gamma_rad = device.emission_rate(flux);
  c.gammaphi_extra = device.transmon.gammaphi_flux.at(flux);
  const ChannelRates r = channel_rates(device.transmon, c);
  TwoLevelRates out;
  out.gamma1 = r.down + r.up;
  out.gamma2 = 0.5 * out.gamma1 + r.dephasing;
  out.rabi_decay = 0.5 * (out.gamma1 + out.gamma2);
  return out;
}

RabiResult rabi_experiment(const Device& device, double flux, double rabi,
                           const std::vector<double>& durations, double window,
                           const ExperimentOptions& options) {
  device.validate();
  require(rabi >= 0.0 && std::isfinite(rabi), "rabi_experiment: Rabi frequency must be nonnegative");
  require(durations.size() >= 6, "rabi_experiment: need at least 6 durations");
  require(std::is_sorted(durations.begin(), durations.end()) && durations.front() >= 0.0,
          "rabi_experiment: durations must be sorted and nonnegative");
  require(window >= 0.0, "rabi_experiment: window must be nonnegative");

  RabiResult out;
  out.durations = durations;
  out.window = window > 0.0 ? window : default_window(5.0, two_level_rates(device, flux).gamma2);
  const double gamma_rad = device.emission_rate(flux);
  const DensityMatrix initial = steady_state(device.transmon, gamma_rad);

  // One driven run, snapshotted at every pulse length.
  SimulationOptions drive_opts;
  drive_opts.dt = options.dt;
  drive_opts.record = false;
  drive_opts.snapshot_times = durations;
  const auto driven = simulate(device.transmon,
                               fixed_flux_controls(device, flux, DriveSample{rabi, constants::pi / 2.0, 0.0}),
                               initial, 0.0, durations.back(), drive_opts);

  std::vector<Complex> quad(durations.size());
  out.power.assign(durations.size(), 0.0);
  parallel_for(durations.size(), options.threads, [&](std::size_t k) {
    SimulationOptions free_opts;
    free_opts.dt = options.dt;
    free_opts.record_interval = options.record_interval;
    const auto res = simulate(device.transmon, fixed_flux_controls(device, flux, DriveSample{}),
                              driven.snapshots[k], 0.0, out.window, free_opts);
    Complex acc = 0.0;
    double p = 0.0;
    for (std::size_t j = 0; j < res.record.size(); ++j) {
      acc += Complex(res.record.i_quadrature[j], res.record.q_quadrature[j]);
      p += res.record.power[j];
    }
    const double n = static_cast<double>(res.record.size());
    quad[k] = acc / n;
    out.power[k] = p / n;
  });

  out.rotation = principal_rotation(quad);
  const Complex rot = std::polar(1.0, out.rotation);
  out.signal.resize(quad.size());
  for (std::size_t k = 0; k < quad.size(); ++k) out.signal[k] = (quad[k] * rot).real();

  out.signal_fit = fit_damped_sinusoid(durations, out.signal);
  out.power_fit = fit_damped_sinusoid(durations, out.power);
  out.t_rabi = time_figure("T_R", out.signal_fit, durations.front(), durations.back());
  if (!out.signal_fit.degenerate && !out.power_fit.degenerate) {
    out.phase_offset = std::abs(std::remainder(
        out.signal_fit.value("phase") - out.power_fit.value("phase"), constants::two_pi));
  }
  return out;
}

DecayResult free_decay_experiment(const Device& device, double flux, double window,
                                  const ExperimentOptions& options) {
  device.validate();
  require(window >= 0.0, "free_decay_experiment: window must be nonnegative");
  const TwoLevelRates rates = two_level_rates(device, flux);
  if (window == 0.0) window = default_window(8.0, rates.gamma2);

  const DrivePulse pulse = calibrated_pulse(device, flux, constants::pi / 2.0, 0.0);
  ControlFn controls = fixed_flux_controls(device, flux, pulse);
  SimulationOptions sim;
  sim.dt = options.dt;
  sim.record_interval = options.record_interval;
  sim.breakpoints = {pulse.end()};
  const DensityMatrix initial = steady_state(device.transmon, device.emission_rate(flux));

  DecayResult out;
  out.record = simulate(device.transmon, controls, initial, 0.0, pulse.end() + window, sim,
                        [flux](double) { return flux; })
                   .record;
  out.record.annotations.push_back({pulse.start, pulse.end(), "excitation"});
  rotate_to_i(out.record);

  out.fit_start = pulse.end();
  std::vector<double> t, y;
  for (std::size_t k = 0; k < out.record.size(); ++k) {
    if (out.record.t[k] < out.fit_start - 1e-15) continue;
    t.push_back(out.record.t[k] - out.fit_start);
    y.push_back(std::hypot(out.record.i_quadrature[k], out.record.q_quadrature[k]));
  }
  out.fit = fit_exponential(t, y, true);
  out.no_decay = !resolved_decay(y, out.fit, window);
  if (!out.no_decay) out.t2_star = time_figure("T2*", out.fit, out.fit_start, out.fit_start + window);
  return out;
}

TriggeredSchedule triggered_schedule(const Device& device, const TriggeredOptions& o) {
  device.validate();
  const auto bad = [](const char* what) { throw Error(ErrorCode::schedule, what); };
  if (!(o.storage_time >= 0.0) || !std::isfinite(o.storage_time)) {
    bad("triggered: the excitation pulse overlaps the trailing flux edge");
  }
  if (!(o.settle_time >= 0.0) || !std::isfinite(o.settle_time)) {
    bad("triggered: the excitation pulse overlaps the leading flux edge");
  }
  if (!(o.lead_time >= 0.0) || !(o.flux_ramp > 0.0) || !(o.emission_window >= 0.0)) {
    bad("triggered: lead time, ramp and window must be nonnegative");
  }
  const double storage_flux = o.storage_flux ? *o.storage_flux : device.decoupling_flux();
  double window = o.emission_window;
  if (window == 0.0) {
    const double g2 = two_level_rates(device, o.release_flux).gamma2;
    window = default_window(10.0, g2);
  }

  TriggeredSchedule out;
  out.pulse_start = o.lead_time + o.flux_ramp + o.settle_time;
  out.pulse_end = out.pulse_start + o.pulse.duration;
  out.release = out.pulse_end + o.storage_time;

  FluxSegment seg;
  seg.shape = FluxShape::square;
  seg.level = storage_flux;
  seg.start = o.lead_time;
  seg.ramp = o.flux_ramp;
  seg.duration = out.release - o.lead_time;
  out.schedule.flux_segments.push_back(seg);
  out.schedule.idle_flux = o.release_flux;
  out.schedule.t_end = out.release + o.flux_ramp + window;
  if (!o.start_excited && o.excitation != Excitation::none) {
    const double angle = o.excitation == Excitation::pi ? constants::pi : constants::pi / 2.0;
    out.schedule.drive_segments.push_back(
        calibrated_pulse(device, storage_flux, angle, out.pulse_start, o.pulse));
  }
  out.schedule.validate();
  return out;
}

TriggeredResult triggered_emission(const Device& device, const TriggeredOptions& options,
                                   const ExperimentOptions& run) {
  TriggeredResult out;
  out.program = triggered_schedule(device, options);
  const auto& prog = out.program;

  DensityMatrix initial = options.start_excited
                              ? fock_state(device.transmon.levels, 1)
                              : steady_state(device.transmon, device.emission_rate(options.release_flux));
  RunOptions ro;
  ro.dt = run.dt;
  ro.record_interval = run.record_interval;
  ro.snapshot_times = {prog.release};
  const auto res = run_schedule(device, prog.schedule, initial, ro);
  out.record = res.record;
  if (!prog.schedule.drive_segments.empty()) {
    out.record.annotations.push_back({prog.pulse_start, prog.pulse_end, "excitation_leakage"});
  }
  out.record.annotations.push_back({prog.pulse_end, prog.release, "storage"});
  out.record.annotations.push_back({prog.release, prog.schedule.duration(), "emission"});
  out.excited_at_release = number_expectation(res.snapshots[0]);

  const auto& rec = out.record;
  out.burst_photons = rec.emitted_photons - interpolate(rec.t, rec.emitted, prog.release);

  const double burst_start = prog.release + options.flux_ramp;
  std::vector<double> t, y;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const double tk = rec.t[k];
    if (tk > prog.pulse_end && tk <= prog.release) {
      out.storage_peak_power = std::max(out.storage_peak_power, rec.power[k]);
    }
    if (tk >= prog.release) out.burst_peak_power = std::max(out.burst_peak_power, rec.power[k]);
    if (tk >= burst_start) {
      t.push_back(tk - burst_start);
      y.push_back(options.excitation != Excitation::half_pi || options.start_excited
                      ? rec.power[k]
                      : std::hypot(rec.i_quadrature[k], rec.q_quadrature[k]));
    }
  }
  if (t.size() >= 4) {
    const FitResult fit = fit_exponential(t, y, true);
    out.burst_tau = time_figure("burst_tau", fit, burst_start, rec.t.back());
  }
  return out;
}

namespace {

// Shared body of the two intrinsic-coherence scans: program(delay) builds the
// pulse sequence at the decoupling point, the integrated quadrature after the
// release is the signal.
DelayScanResult delay_scan(const Device& device, const std::vector<double>& delays,
                           const ExperimentOptions& options, bool t1_mode) {
  device.validate();
  require(delays.size() >= 4, "delay scan: need at least 4 delays");
  require(std::is_sorted(delays.begin(), delays.end()) && delays.front() >= 0.0,
          "delay scan: delays must be sorted and nonnegative");

  const double phi_dec = device.decoupling_flux();
  const double release_flux = 0.0;
  const PulseShape shape;
  const double ramp = 1e-9;
  const double lead = 0.0;
  const double settle = 10e-9;
  const double pi_amp = calibrate_amplitude(device, phi_dec, constants::pi, shape);
  const double half_amp = calibrate_amplitude(device, phi_dec, constants::pi / 2.0, shape);
  const double g2 = two_level_rates(device, release_flux).gamma2;
  const double window = default_window(5.0, g2);
  const DensityMatrix initial = steady_state(device.transmon, device.emission_rate(phi_dec));

  std::vector<Complex> quad(delays.size());
  parallel_for(delays.size(), options.threads, [&](std::size_t k) {
    PulseSchedule s;
    s.idle_flux = release_flux;
    double t = lead + ramp + settle;
    if (t1_mode) {
      s.drive_segments.push_back(gaussian_pulse(shape, pi_amp, t));
      t += shape.duration + delays[k];
      s.drive_segments.push_back(gaussian_pulse(shape, half_amp, t));
      t += shape.duration;
    } else {
      s.drive_segments.push_back(gaussian_pulse(shape, half_amp, t));
      t += shape.duration + delays[k];
    }
    FluxSegment seg;
    seg.level = phi_dec;
    seg.start = lead;
    seg.ramp = ramp;
    seg.duration = t - lead;
    s.flux_segments.push_back(seg);
    const double release = t;
    s.t_end = release + ramp + window;

    RunOptions ro;
    ro.dt = options.dt;
    ro.record_interval = options.record_interval;
    const auto res = run_schedule(device, s, initial, ro);
    Complex acc = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < res.record.size(); ++j) {
      if (res.record.t[j] < release) continue;
      acc += Complex(res.record.i_quadrature[j], res.record.q_quadrature[j]);
      ++n;
    }
    quad[k] = acc / static_cast<double>(std::max<std::size_t>(n, 1));
  });

  DelayScanResult out;
  out.delays = delays;
  const Complex rot = std::polar(1.0, principal_rotation(quad));
  out.signal.resize(quad.size());
  for (std::size_t k = 0; k < quad.size(); ++k) out.signal[k] = (quad[k] * rot).real();
  out.fit = fit_exponential(delays, out.signal, true);
  if (!resolved_decay(out.signal, out.fit, delays.back() - delays.front())) return out;
  out.time = time_figure(t1_mode ? "T1_i" : "T2*_i", out.fit, delays.front(), delays.back());
  return out;
}

}  // namespace

DelayScanResult intrinsic_t1_experiment(const Device& device, const std::vector<double>& delays,
                                        const ExperimentOptions& options) {
  return delay_scan(device, delays, options, true);
}

DelayScanResult intrinsic_t2_experiment(const Device& device, const std::vector<double>& delays,
                                        const ExperimentOptions& options) {
  return delay_scan(device, delays, options, false);
}

double pure_dephasing_time(double t1, double t2) {
  require(t1 > 0.0 && t2 > 0.0, "pure_dephasing_time: times must be positive");
  const double rate = 1.0 / t2 - 0.5 / t1;
  require(rate >= 0.0, "pure_dephasing_time: T2 exceeds 2 T1");
  return rate == 0.0 ? kInf : 1.0 / rate;
}

JitterFigure jitter_figure(double t1_intrinsic, double t2_min, double gamma_phi) {
  require(t1_intrinsic > 0.0 && t2_min > 0.0 && gamma_phi >= 0.0,
          "jitter_figure: times must be positive and gamma_phi nonnegative");
  const double rate = 1.0 / t2_min - gamma_phi;
  require(rate > 0.0, "jitter_figure: gamma_phi exceeds 1 / T2");
  JitterFigure out;
  out.t1_jit = 1.0 / (2.0 * rate);
  out.ratio = t1_intrinsic / out.t1_jit;
  return out;
}

}  // namespace photongen
