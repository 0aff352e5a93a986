#include "photongen/io/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "photongen/constants.hpp"
#include "photongen/errors.hpp"
#include "photongen/io/csv.hpp"

namespace photongen::io {
namespace {

using nlohmann::json;

constexpr double kNs = 1e-9;
constexpr double kGHzAngular = constants::two_pi * 1e9;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::validation, path + ": " + what);
}

enum class Check { any, positive, nonnegative };

// A JSON object being read: every key read is recorded so that leftovers can
// be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  std::optional<double> number(const std::string& key, Check check = Check::any) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_number()) invalid(path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) invalid(path(key), "must be finite");
    if (check == Check::positive && !(x > 0.0)) invalid(path(key), "must be positive");
    if (check == Check::nonnegative && !(x >= 0.0)) invalid(path(key), "must be nonnegative");
    return x;
  }

  void number(const std::string& key, double& target, double scale, Check check = Check::any) {
    if (auto v = number(key, check)) target = *v * scale;
  }

  void integer(const std::string& key, int& target, int minimum) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) invalid(path(key), "expected an integer");
    const auto x = v.get<long long>();
    if (x < minimum || x > 100000000) invalid(path(key), "must be at least " + std::to_string(minimum));
    target = static_cast<int>(x);
  }

  std::optional<std::uint64_t> unsigned_integer(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      invalid(path(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::optional<std::string> string(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    if (!j_.at(key).is_string()) invalid(path(key), "expected a string");
    return j_.at(key).get<std::string>();
  }

  template <typename T>
  void choice(const std::string& key, T& target, const std::map<std::string, T>& options) {
    if (auto s = string(key)) {
      const auto it = options.find(*s);
      if (it == options.end()) {
        std::string allowed;
        for (const auto& [name, value] : options) allowed += (allowed.empty() ? "" : ", ") + name;
        invalid(path(key), "unknown value '" + *s + "' (expected one of " + allowed + ")");
      }
      target = it->second;
    }
  }

  void boolean(const std::string& key, bool& target) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_boolean()) invalid(path(key), "expected true or false");
    target = j_.at(key).get<bool>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key, Check check = Check::any) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_array()) invalid(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::string p = path(key) + "[" + std::to_string(k) + "]";
      if (!v[k].is_number()) invalid(p, "expected a number");
      const double x = v[k].get<double>();
      if (!std::isfinite(x)) invalid(p, "must be finite");
      if (check == Check::positive && !(x > 0.0)) invalid(p, "must be positive");
      if (check == Check::nonnegative && !(x >= 0.0)) invalid(p, "must be nonnegative");
      out.push_back(x);
    }
    return out;
  }

  std::optional<Section> child(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_.at(key), path(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) invalid(path(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_device(Section& s, Device& d) {
  if (auto line = s.child("line")) {
    line->number("z0_ohm", d.line.z0, 1.0, Check::positive);
    line->number("v_m_per_s", d.line.v, 1.0, Check::positive);
    line->number("x_mm", d.line.x_qubit, 1e-3, Check::positive);
    d.line.l0 = d.line.z0 / d.line.v;
    line->finish();
  }
  if (auto sq = s.child("squid")) {
    sq->number("ic1_na", d.squid.ic1, 1e-9, Check::positive);
    sq->number("ic2_na", d.squid.ic2, 1e-9, Check::positive);
    sq->number("c_sq_ff", d.squid.c_sq, 1e-15, Check::positive);
    sq->number("mutual_ph", d.squid.mutual, 1e-12, Check::positive);
    sq->finish();
  }
  if (auto c = s.child("coupling")) {
    c->number("c_s_ff", d.coupling.c_s, 1e-15, Check::positive);
    c->number("c_sigma_ff", d.coupling.c_sigma, 1e-15, Check::positive);
    c->number("ej_ghz", d.coupling.e_j, constants::planck * 1e9, Check::positive);
    c->number("ec_ghz", d.coupling.e_c, constants::planck * 1e9, Check::positive);
    c->number("phi_off_rad", d.coupling.phi_off, 1.0);
    c->finish();
  }
  if (auto t = s.child("transmon")) {
    auto& p = d.transmon;
    t->number("f01_ghz", p.omega01, kGHzAngular, Check::positive);
    t->number("alpha_ghz", p.alpha, kGHzAngular);
    t->integer("levels", p.levels, 2);
    if (p.levels > kMaxLevels) invalid(t->path("levels"), "at most " + std::to_string(kMaxLevels) + " levels");
    const auto t1 = t->number("t1_intrinsic_ns", Check::positive);
    const auto t2 = t->number("t2_intrinsic_ns", Check::positive);
    if (t1) p.gamma1_intrinsic = 1.0 / (*t1 * kNs);
    if (t2) {
      const double rate = 1.0 / (*t2 * kNs) - 0.5 * p.gamma1_intrinsic;
      if (rate < 0.0) invalid(t->path("t2_intrinsic_ns"), "exceeds twice the intrinsic T1");
      p.gammaphi_intrinsic = rate;
    }
    t->number("t_eff_mk", p.t_eff, 1e-3, Check::nonnegative);
    t->number("t_line_mk", p.t_line, 1e-3, Check::nonnegative);
    t->number("gamma_excitation_ghz", p.gamma_excitation_line, kGHzAngular, Check::nonnegative);
    if (auto table = t->child("dephasing_table")) {
      const auto flux = table->numbers("flux");
      const auto rate = table->numbers("rate_ghz", Check::nonnegative);
      if (!flux || !rate) invalid(t->path("dephasing_table"), "needs both 'flux' and 'rate_ghz'");
      if (flux->size() != rate->size()) invalid(t->path("dephasing_table"), "'flux' and 'rate_ghz' differ in length");
      p.gammaphi_flux.flux = *flux;
      p.gammaphi_flux.value.clear();
      for (double r : *rate) p.gammaphi_flux.value.push_back(r * kGHzAngular);
      table->finish();
    }
    t->finish();
  }
  s.finish();
  try {
    d.validate();
  } catch (const Error& e) {
    invalid("device", e.what());
  }
}

void read_numerics(Section& s, NumericsConfig& n) {
  s.number("dt_ns", n.dt, kNs, Check::nonnegative);
  s.number("record_interval_ns", n.record_interval, kNs, Check::positive);
  if (auto seed = s.unsigned_integer("seed")) n.seed = *seed;
  if (auto th = s.unsigned_integer("threads")) n.threads = static_cast<unsigned>(*th);
  s.finish();
}

SpectroSweepConfig read_spectro(Section& s) {
  SpectroSweepConfig c;
  s.number("flux_start", c.flux_start, 1.0);
  s.number("flux_stop", c.flux_stop, 1.0);
  s.integer("flux_points", c.flux_points, 2);
  s.number("half_span_ghz", c.half_span, kGHzAngular, Check::positive);
  s.integer("detuning_points", c.detuning_points, 8);
  s.number("noise_sigma", c.noise_sigma, 1.0, Check::nonnegative);
  if (!(c.flux_stop > c.flux_start)) invalid(s.path("flux_stop"), "must exceed flux_start");
  s.finish();
  return c;
}

FitCurveConfig read_fit(Section& s) {
  FitCurveConfig c;
  if (auto in = s.string("input")) c.input = *in;
  s.integer("points", c.points, 10);
  s.number("noise_fraction", c.noise_fraction, 1.0, Check::nonnegative);
  s.choice<CurveResidual>("residual", c.residual,
                          {{"logarithmic", CurveResidual::logarithmic}, {"absolute", CurveResidual::absolute}});
  s.choice<FitMethod>("method", c.method,
                      {{"nelder_mead", FitMethod::nelder_mead},
                       {"levenberg_marquardt", FitMethod::levenberg_marquardt}});
  s.finish();
  return c;
}

RabiConfig read_rabi(Section& s) {
  RabiConfig c;
  c.rabi = 10e-3 * kGHzAngular;
  s.number("flux", c.flux, 1.0);
  s.number("rabi_ghz", c.rabi, kGHzAngular, Check::positive);
  s.number("duration_stop_ns", c.duration_stop, kNs, Check::positive);
  s.integer("durations", c.durations, 6);
  s.number("window_ns", c.window, kNs, Check::positive);
  s.finish();
  return c;
}

DecayConfig read_decay(Section& s) {
  DecayConfig c;
  s.number("flux", c.flux, 1.0);
  s.number("window_ns", c.window, kNs, Check::positive);
  s.finish();
  return c;
}

TriggeredOptions read_triggered(Section& s) {
  TriggeredOptions o;
  s.number("storage_ns", o.storage_time, kNs, Check::nonnegative);
  s.choice<Excitation>("excitation", o.excitation, {{"pi", Excitation::pi}, {"half_pi", Excitation::half_pi}, {"none", Excitation::none}});
  s.number("lead_ns", o.lead_time, kNs, Check::nonnegative);
  s.number("settle_ns", o.settle_time, kNs, Check::nonnegative);
  s.number("window_ns", o.emission_window, kNs, Check::positive);
  s.number("ramp_ns", o.flux_ramp, kNs, Check::positive);
  if (auto f = s.number("storage_flux")) o.storage_flux = *f;
  s.number("release_flux", o.release_flux, 1.0);
  s.number("pulse_ns", o.pulse.duration, kNs, Check::positive);
  s.number("pulse_sigma_ns", o.pulse.sigma, kNs, Check::positive);
  s.finish();
  return o;
}

ShapedConfig read_shaped(Section& s) {
  ShapedConfig c;
  auto& e = c.edge;
  s.choice<FluxShape>("shape", e.shape,
                      {{"square", FluxShape::square},
                       {"exp_edge", FluxShape::exp_edge},
                       {"cubic_exp_edge", FluxShape::cubic_exp_edge}});
  if (auto f = s.number("storage_flux")) e.storage_flux = *f;
  s.number("emit_flux", e.emit_flux, 1.0);
  s.number("hold_ns", e.hold, kNs, Check::nonnegative);
  s.number("ramp_ns", e.ramp, kNs, Check::positive);
  s.number("edge_time_ns", e.edge_time, kNs, Check::positive);
  s.number("duration_ns", e.duration, kNs, Check::positive);
  s.number("dt_ns", e.dt, kNs, Check::positive);
  s.finish();
  return c;
}

InvertShapeConfig read_invert(Section& s) {
  InvertShapeConfig c;
  s.choice<TargetKind>("target", c.kind,
                       {{"sech", TargetKind::sech},
                        {"exponential", TargetKind::exponential},
                        {"rising", TargetKind::rising},
                        {"csv", TargetKind::csv}});
  if (auto in = s.string("input")) c.input = *in;
  s.number("gamma_fraction", c.gamma_fraction, 1.0, Check::positive);
  s.number("center_ns", c.center, kNs);
  s.number("t_start_ns", c.t_start, kNs);
  s.number("t_stop_ns", c.t_stop, kNs);
  s.integer("points", c.points, 2);
  s.choice<Branch>("branch", c.branch, {{"positive", Branch::positive}, {"negative", Branch::negative}});
  s.number("clamp_threshold", c.clamp_threshold, 1.0, Check::nonnegative);
  s.boolean("ideal", c.ideal);
  if (c.kind == TargetKind::csv && c.input.empty()) invalid(s.path("input"), "required for csv targets");
  if (!(c.t_stop > c.t_start)) invalid(s.path("t_stop_ns"), "must exceed t_start_ns");
  s.finish();
  return c;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"spectro-sweep", "fit-curve", "rabi", "decay",
                                                 "triggered", "shaped", "invert-shape", "fidelity-table"};
  return names;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical); }

RunConfig parse_config(const std::string& text, const ParseOverrides& overrides) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::validation, std::string("config: not valid JSON: ") + e.what());
  }
  if (!root.is_object()) invalid("config", "expected an object at the top level");
  if (overrides.profile) root["profile"] = *overrides.profile;
  if (overrides.seed) root["numerics"]["seed"] = *overrides.seed;

  RunConfig cfg;
  Section top(root, "");
  if (auto p = top.string("profile")) cfg.profile = *p;
  try {
    cfg.device = device_preset(cfg.profile);
  } catch (const Error&) {
    invalid("profile", "unknown profile '" + cfg.profile + "' (expected paper2017 or estimated)");
  }
  if (auto dev = top.child("device")) read_device(*dev, cfg.device);
  if (auto num = top.child("numerics")) read_numerics(*num, cfg.numerics);
  if (auto out = top.child("output")) {
    if (auto dir = out->string("dir")) cfg.output_dir = *dir;
    out->finish();
  }

  auto exp = top.child("experiment");
  if (!exp || root.at("experiment").empty()) {
    std::string names;
    for (const auto& n : subcommands()) names += (names.empty() ? "" : ", ") + n;
    invalid("experiment", "missing section: expected one of " + names);
  }
  if (auto s = exp->child("spectro-sweep")) cfg.spectro_sweep = read_spectro(*s);
  if (auto s = exp->child("fit-curve")) cfg.fit_curve = read_fit(*s);
  if (auto s = exp->child("rabi")) cfg.rabi = read_rabi(*s);
  if (auto s = exp->child("decay")) cfg.decay = read_decay(*s);
  if (auto s = exp->child("triggered")) cfg.triggered = read_triggered(*s);
  if (auto s = exp->child("shaped")) cfg.shaped = read_shaped(*s);
  if (auto s = exp->child("invert-shape")) cfg.invert_shape = read_invert(*s);
  if (auto s = exp->child("fidelity-table")) {
    FidelityTableConfig c;
    if (s->has("targets")) {
      const json& arr = root.at("experiment").at("fidelity-table").at("targets");
      if (!arr.is_array() || arr.empty()) invalid(s->path("targets"), "expected a non-empty array of names");
      c.targets.clear();
      for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string p = s->path("targets") + "[" + std::to_string(k) + "]";
        if (!arr[k].is_string()) invalid(p, "expected \"fock\" or \"superposition\"");
        try {
          c.targets.push_back(target_from_string(arr[k].get<std::string>()));
        } catch (const Error&) {
          invalid(p, "expected \"fock\" or \"superposition\"");
        }
      }
    }
    s->string("targets");  // mark as read; validated above
    if (auto st = s->numbers("storage_ns", Check::nonnegative)) {
      if (st->empty()) invalid(s->path("storage_ns"), "expected at least one storage time");
      c.storage_times.clear();
      for (double v : *st) c.storage_times.push_back(v * kNs);
    }
    s->finish();
    cfg.fidelity_table = c;
  }
  exp->finish();
  top.finish();

  if (overrides.threads) cfg.numerics.threads = *overrides.threads;
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;

  json canon = root;
  canon.erase("output");
  if (canon.contains("numerics")) canon["numerics"].erase("threads");
  canon["profile"] = cfg.profile;
  cfg.canonical = canon.dump();
  return cfg;
}

RunConfig default_config(const std::string& subcommand, const ParseOverrides& overrides) {
  bool known = false;
  for (const auto& n : subcommands()) known = known || n == subcommand;
  if (!known) throw Error(ErrorCode::invalid_argument, "unknown subcommand '" + subcommand + "'");
  json root;
  root["experiment"][subcommand] = json::object();
  return parse_config(root.dump(), overrides);
}

void require_section(const RunConfig& c, const std::string& sub) {
  const bool present = (sub == "spectro-sweep" && c.spectro_sweep) || (sub == "fit-curve" && c.fit_curve) ||
                       (sub == "rabi" && c.rabi) || (sub == "decay" && c.decay) ||
                       (sub == "triggered" && c.triggered) || (sub == "shaped" && c.shaped) ||
                       (sub == "invert-shape" && c.invert_shape) ||
                       (sub == "fidelity-table" && c.fidelity_table);
  if (!present) invalid("experiment." + sub, "missing section");
}

}  // namespace photongen::io
