#include "photongen/io/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "photongen/constants.hpp"
#include "photongen/errors.hpp"
#include "photongen/fidelity.hpp"
#include "photongen/parallel.hpp"
#include "photongen/sequencer.hpp"
#include "photongen/shaping.hpp"
#include "photongen/spectroscopy.hpp"

#ifndef PHOTONGEN_VERSION
#define PHOTONGEN_VERSION "0.0.0"
#endif

namespace photongen::io {
namespace {

using nlohmann::json;
using constants::two_pi;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[k] = n == 1 ? a : a + (b - a) * k / (n - 1);
  return out;
}

// NaN and infinities are not JSON; they are written as null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json fom_json(const FigureOfMerit& f) {
  return {{"name", f.name},
          {"value", num(f.value)},
          {"uncertainty", num(f.uncertainty)},
          {"window_start", num(f.window_start)},
          {"window_end", num(f.window_end)}};
}

json fit_json(const FitResult& fit) {
  json params = json::object();
  for (std::size_t k = 0; k < fit.names.size(); ++k) {
    params[fit.names[k]] = {{"value", num(fit.values[k])},
                            {"uncertainty", num(k < fit.uncertainties.size() ? fit.uncertainties[k] : 0.0)}};
  }
  return {{"parameters", params},
          {"residual_norm", num(fit.residual_norm)},
          {"converged", fit.converged},
          {"degenerate", fit.degenerate}};
}

ExperimentOptions experiment_options(const RunConfig& c) {
  ExperimentOptions o;
  o.dt = c.numerics.dt;
  o.record_interval = c.numerics.record_interval;
  o.threads = c.numerics.threads;
  return o;
}

// Collects the files of one run; they are written only after the whole
// computation succeeded, by this thread alone.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
  json summary = json::object();
  json figures = json::array();
  long long steps = 0;

  void csv(const std::string& name, const CsvTable& table) {
    table.validate();
    files.emplace_back(name, to_csv(table));
  }
  void fom(const FigureOfMerit& f) { figures.push_back(fom_json(f)); }
  void fom(const std::string& name, double value, double uncertainty = 0.0) {
    fom(FigureOfMerit{name, value, uncertainty, 0.0, 0.0});
  }
};

void run_spectro_sweep(const RunConfig& c, Outputs& out) {
  const auto& s = *c.spectro_sweep;
  const Device& d = c.device;
  const auto fluxes = linspace(s.flux_start, s.flux_stop, s.flux_points);
  double half_span = s.half_span;
  if (half_span == 0.0) {
    for (double phi : fluxes) half_span = std::max(half_span, 4.0 * spectroscopic_rates(d, FluxBias{phi}).gamma2);
  }
  const auto detunings = detuning_grid(half_span, static_cast<std::size_t>(s.detuning_points));
  const auto sweep = spectroscopy_sweep(d, fluxes, detunings, s.noise_sigma, c.numerics.seed, c.numerics.threads);

  CsvTable curve;
  std::vector<double> f, g1, g2, model, degenerate;
  for (const auto& p : sweep) {
    f.push_back(p.point.flux);
    g1.push_back(p.point.gamma1);
    g2.push_back(p.point.gamma2);
    model.push_back(d.emission_rate(p.point.flux));
    degenerate.push_back(p.degenerate ? 1.0 : 0.0);
  }
  curve.add("flux", f);
  curve.add("gamma1", g1);
  curve.add("gamma2", g2);
  curve.add("gamma1_model", model);
  curve.add("degenerate", degenerate);
  out.csv("curve.csv", curve);

  // Same per-trace seeds as the sweep, so the traces are the ones fitted.
  CsvTable traces;
  std::vector<double> tf, td, re, im;
  for (std::size_t k = 0; k < fluxes.size(); ++k) {
    const auto tr = synthesize_trace(d, FluxBias{fluxes[k]}, detunings, s.noise_sigma, split_seed(c.numerics.seed, k));
    for (std::size_t j = 0; j < detunings.size(); ++j) {
      tf.push_back(fluxes[k]);
      td.push_back(detunings[j]);
      re.push_back(tr.r_values[j].real());
      im.push_back(tr.r_values[j].imag());
    }
  }
  traces.add("flux", tf);
  traces.add("detuning", td);
  traces.add("re_r", re);
  traces.add("im_r", im);
  out.csv("traces.csv", traces);

  const auto best = std::max_element(g1.begin(), g1.end());
  out.fom("max_gamma1", *best / two_pi);
  out.fom("max_gamma1_flux", f[static_cast<std::size_t>(best - g1.begin())]);
  out.fom("degenerate_traces", std::count(degenerate.begin(), degenerate.end(), 1.0));
  out.summary["half_span"] = half_span;
}

void run_fit_curve(const RunConfig& c, Outputs& out) {
  const auto& s = *c.fit_curve;
  std::vector<FluxPoint> points;
  const bool synthetic = s.input.empty();
  if (synthetic) {
    std::vector<double> fluxes(static_cast<std::size_t>(s.points));
    for (int k = 0; k < s.points; ++k) fluxes[k] = static_cast<double>(k) / s.points;
    points = synthetic_flux_curve(c.device, fluxes, s.noise_fraction, c.numerics.seed);
  } else {
    const CsvTable in = read_csv(s.input);
    const auto& f = in["flux"];
    const auto& g1 = in["gamma1"];
    const bool has_g2 = std::find(in.header.begin(), in.header.end(), "gamma2") != in.header.end();
    for (std::size_t k = 0; k < in.rows(); ++k) {
      points.push_back({f[k], g1[k], has_g2 ? in["gamma2"][k] : 0.0});
    }
  }
  CurveFitOptions opts;
  opts.method = s.method;
  opts.residual = s.residual;
  const FitResult fit = fit_flux_curve(points, c.device, opts);
  CurveParams p{fit.value("ic1"), fit.value("ic2"), fit.value("c_sq"), fit.value("c_s"), fit.value("phi_off")};
  const Device fitted = with_curve_params(c.device, p);

  CsvTable table;
  std::vector<double> f, data, model;
  for (const auto& pt : points) {
    f.push_back(pt.flux);
    data.push_back(pt.gamma1);
    model.push_back(fitted.emission_rate(pt.flux));
  }
  table.add("flux", f);
  table.add("gamma1", data);
  table.add("gamma1_fit", model);
  out.csv("fit.csv", table);

  out.summary["fit"] = fit_json(fit);
  for (std::size_t k = 0; k < fit.names.size(); ++k) out.fom(fit.names[k], fit.values[k], fit.uncertainties[k]);
  if (synthetic) {
    const CurveParams truth = curve_params(c.device);
    const double tv[] = {truth.ic1, truth.ic2, truth.c_sq, truth.c_s, truth.phi_off};
    const double fv[] = {p.ic1, p.ic2, p.c_sq, p.c_s, p.phi_off};
    const char* names[] = {"ic1", "ic2", "c_sq", "c_s", "phi_off"};
    json rel = json::object();
    for (int k = 0; k < 5; ++k) rel[names[k]] = num(std::abs(fv[k] - tv[k]) / std::abs(tv[k]));
    out.summary["relative_error"] = rel;
  }
}

void run_rabi(const RunConfig& c, Outputs& out) {
  const auto& s = *c.rabi;
  double stop = s.duration_stop;
  if (stop == 0.0) stop = 5.0 / two_level_rates(c.device, s.flux).rabi_decay;
  const auto durations = linspace(0.0, stop, s.durations);
  const RabiResult r = rabi_experiment(c.device, s.flux, s.rabi, durations, s.window, experiment_options(c));

  CsvTable table;
  table.add("duration", r.durations);
  table.add("signal", r.signal);
  table.add("power", r.power);
  out.csv("rabi.csv", table);
  if (r.t_rabi) out.fom(*r.t_rabi);
  if (r.phase_offset) out.fom("phase_offset", *r.phase_offset);
  out.summary["rotation"] = r.rotation;
  out.summary["window"] = r.window;
  out.summary["signal_fit"] = fit_json(r.signal_fit);
  out.summary["power_fit"] = fit_json(r.power_fit);
}

void run_decay(const RunConfig& c, Outputs& out) {
  const auto& s = *c.decay;
  const DecayResult r = free_decay_experiment(c.device, s.flux, s.window, experiment_options(c));
  out.csv("record.csv", record_table(r.record));
  out.steps += r.record.steps;
  if (r.t2_star) out.fom(*r.t2_star);
  out.summary["no_decay"] = r.no_decay;
  out.summary["fit_start"] = r.fit_start;
  out.summary["fit"] = fit_json(r.fit);
}

void run_triggered(const RunConfig& c, Outputs& out) {
  const TriggeredResult r = triggered_emission(c.device, *c.triggered, experiment_options(c));
  out.csv("record.csv", record_table(r.record));
  out.steps += r.record.steps;
  if (r.burst_tau) out.fom(*r.burst_tau);
  out.fom("excited_at_release", r.excited_at_release);
  out.fom("burst_photons", r.burst_photons);
  out.fom("storage_peak_power", r.storage_peak_power);
  out.fom("burst_peak_power", r.burst_peak_power);
  json ann = json::array();
  for (const auto& a : r.record.annotations) ann.push_back({{"label", a.label}, {"start", a.start}, {"end", a.end}});
  out.summary["annotations"] = ann;
}

CsvTable trajectory_table(const FluxTrajectory& t) {
  CsvTable table;
  table.add("t", t.t);
  table.add("flux", t.flux);
  table.add("current", t.current);
  return table;
}

void run_shaped(const RunConfig& c, Outputs& out) {
  const EdgeParams& e = c.shaped->edge;
  const FluxTrajectory traj = emulate_paper_edges(c.device, e);
  out.csv("trajectory.csv", trajectory_table(traj));

  SimulationOptions sim;
  sim.dt = c.numerics.dt;
  sim.record_interval = c.numerics.record_interval;
  const auto flux_of_t = [&traj](double t) { return traj.flux_at(t); };
  const auto run = [&](const Device& d) {
    return simulate(d.transmon, trajectory_controls(d, traj), fock_state(d.transmon.levels, 1), traj.t.front(),
                    traj.t.back(), sim, flux_of_t);
  };
  const SimulationResult real = run(c.device);
  out.csv("record.csv", record_table(real.record));
  out.steps += real.record.steps;

  // The packet shape is judged on the ideal emitter, free of the thermal
  // background that the real device keeps emitting.
  const SimulationResult ideal = run(ideal_emitter(c.device));
  out.steps += ideal.record.steps;
  Wavepacket packet;
  packet.t = ideal.record.t;
  for (double p : ideal.record.power) packet.amplitude.push_back(std::sqrt(std::max(0.0, p)));
  out.fom("rise_fall_ratio", rise_fall_ratio(packet));
  out.fom("emitted_photons", real.record.emitted_photons);
  out.fom("intrinsic_photons", real.record.intrinsic_photons);
  out.summary["edge_time"] = e.edge_time;
}

Wavepacket invert_target(const RunConfig& c, double gamma) {
  const auto& s = *c.invert_shape;
  const auto n = static_cast<std::size_t>(s.points);
  switch (s.kind) {
    case TargetKind::sech:
      return sech_packet(gamma, s.center, s.t_start, s.t_stop, n);
    case TargetKind::exponential:
      return exponential_packet(gamma, s.t_start, s.t_stop, n);
    case TargetKind::rising:
      return rising_packet(gamma, s.t_start, s.t_stop, n);
    case TargetKind::csv: {
      const CsvTable in = read_csv(s.input);
      Wavepacket w;
      w.t = in["t"];
      w.amplitude = in["amplitude"];
      return w;
    }
  }
  throw Error(ErrorCode::invalid_argument, "invert-shape: unknown target");
}

void run_invert_shape(const RunConfig& c, Outputs& out) {
  const auto& s = *c.invert_shape;
  const BranchBounds bounds = branch_bounds(c.device, s.branch);
  const Wavepacket target = invert_target(c, s.gamma_fraction * bounds.peak_rate);
  target.validate();
  const RateProfile rate = rate_from_target(target, bounds.peak_rate, s.clamp_threshold);
  const FluxTrajectory traj = flux_from_rate(rate, c.device, s.branch);
  const Device emitter = s.ideal ? ideal_emitter(c.device) : c.device;
  const ShapeVerification v = verify_shape(traj, target, emitter, c.numerics.dt);

  CsvTable tt = trajectory_table(traj);
  tt.add("gamma1", rate.gamma);
  out.csv("trajectory.csv", tt);
  CsvTable packet;
  packet.add("t", target.t);
  packet.add("target", target.amplitude);
  packet.add("achieved", v.achieved.amplitude);
  out.csv("packet.csv", packet);
  out.csv("record.csv", record_table(v.record));
  out.steps += v.record.steps;

  out.fom("l2_error", v.l2_error);
  out.fom("clamped_fraction", rate.clamped_fraction);
  out.fom("target_norm", target.norm());
  out.fom("achieved_norm", v.achieved_norm);
  out.fom("intrinsic_loss", v.intrinsic_loss);
  out.summary["peak_rate"] = bounds.peak_rate;
}

void run_fidelity_table(const RunConfig& c, Outputs& out) {
  const auto& s = *c.fidelity_table;
  FidelityOptions o;
  o.dt = c.numerics.dt;
  o.threads = c.numerics.threads;

  CsvTable table;
  table.add("storage_time", s.storage_times);
  json reports = json::array();
  for (TargetState target : s.targets) {
    const FidelityReport r = fidelity_report(c.device, target, s.storage_times, o);
    const std::string name = to_string(target);
    table.add(name, r.emission_fidelity);
    out.fom(name + "_prep", r.prep_fidelity);
    for (std::size_t k = 0; k < r.storage_times.size(); ++k) {
      out.fom(FigureOfMerit{name + "_emission", r.emission_fidelity[k], 0.0, r.storage_times[k], r.storage_times[k]});
    }
    json items = json::array();
    for (const auto& b : r.budget.items) items.push_back({{"channel", b.channel}, {"deficit", b.deficit}});
    reports.push_back({{"target", name},
                       {"prep_fidelity", r.prep_fidelity},
                       {"budget_storage_time", r.budget_storage_time},
                       {"budget", {{"items", items},
                                   {"total_deficit", r.budget.total_deficit},
                                   {"remainder", r.budget.remainder}}}});
  }
  out.csv("fidelity.csv", table);
  out.summary["reports"] = reports;
}

std::string hex(std::uint64_t v) { return hex64(v); }

}  // namespace

std::string_view version() { return PHOTONGEN_VERSION; }

CsvTable record_table(const EmissionRecord& r) {
  CsvTable t;
  t.add("t", r.t);
  t.add("I", r.i_quadrature);
  t.add("Q", r.q_quadrature);
  t.add("P", r.power);
  for (std::size_t l = 0; l < r.populations.size(); ++l) t.add("p" + std::to_string(l), r.populations[l]);
  t.add("gamma1", r.gamma1_trace);
  return t;
}

RunReport run_subcommand(const std::string& subcommand, const RunConfig& config) {
  require_section(config, subcommand);
  const auto t0 = std::chrono::steady_clock::now();

  Outputs out;
  if (subcommand == "spectro-sweep") run_spectro_sweep(config, out);
  else if (subcommand == "fit-curve") run_fit_curve(config, out);
  else if (subcommand == "rabi") run_rabi(config, out);
  else if (subcommand == "decay") run_decay(config, out);
  else if (subcommand == "triggered") run_triggered(config, out);
  else if (subcommand == "shaped") run_shaped(config, out);
  else if (subcommand == "invert-shape") run_invert_shape(config, out);
  else if (subcommand == "fidelity-table") run_fidelity_table(config, out);
  else throw Error(ErrorCode::invalid_argument, "unknown subcommand '" + subcommand + "'");

  RunReport report;
  report.subcommand = subcommand;
  report.output_dir = config.output_dir;
  report.steps = out.steps;

  json summary = {{"subcommand", subcommand},
                  {"profile", config.profile},
                  {"config_hash", hex(config.hash())},
                  {"figures_of_merit", out.figures}};
  for (auto& [key, value] : out.summary.items()) summary[key] = value;
  report.summary = summary.dump(2) + "\n";
  out.files.emplace_back("summary.json", report.summary);
  out.files.emplace_back("config.json", json::parse(config.canonical).dump(2) + "\n");

  const std::filesystem::path dir(config.output_dir);
  for (const auto& [name, text] : out.files) {
    write_file((dir / name).string(), text);
    report.checksums[name] = hex(fnv1a64(text));
  }
  report.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json files = json::object();
  for (const auto& [name, sum] : report.checksums) files[name] = sum;
  const json manifest = {{"subcommand", subcommand},
                         {"config_hash", hex(config.hash())},
                         {"version", std::string(version())},
                         {"files", files},
                         {"steps", report.steps},
                         {"threads", config.numerics.threads},
                         {"wall_clock_s", report.wall_clock}};
  write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  return report;
}

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::validation || code == ErrorCode::invalid_argument ? 2 : 1;
}

bool write_error_record(const std::string& dir, const std::string& subcommand, std::string_view code,
                        const std::string& message) {
  const json record = {{"error", {{"code", std::string(code)},
                                  {"message", message},
                                  {"subcommand", subcommand}}}};
  try {
    write_file((std::filesystem::path(dir) / "error.json").string(), record.dump(2) + "\n");
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace photongen::io
