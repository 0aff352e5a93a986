#include "photongen/spectroscopy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "photongen/constants.hpp"
#include "photongen/errors.hpp"
#include "photongen/parallel.hpp"

namespace photongen {
namespace {

using constants::pi;

double wrap_unit(double phi) {
  const double w = phi - std::floor(phi);
  return w >= 1.0 ? 0.0 : w;
}

}  // namespace

void ReflectionTrace::validate() const {
  if (detunings.size() != r_values.size()) {
    throw Error(ErrorCode::invalid_argument, "trace: detuning and r arrays differ in length");
  }
  for (std::size_t k = 1; k < detunings.size(); ++k) {
    if (!(detunings[k] > detunings[k - 1])) {
      throw Error(ErrorCode::invalid_argument, "trace: detunings must strictly increase");
    }
  }
  if (noise_sigma < 0.0) throw Error(ErrorCode::invalid_argument, "trace: negative noise");
}

std::complex<double> reflection_coefficient(double gamma1, double gamma2, double delta_omega) {
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.5 * gamma1) || !std::isfinite(gamma2)) {
    throw Error(ErrorCode::invalid_argument,
                "reflection_coefficient: need gamma2 >= gamma1 / 2 >= 0");
  }
  if (gamma1 == 0.0) return {-1.0, 0.0};
  return -1.0 + gamma1 / std::complex<double>(gamma2, delta_omega);
}

std::vector<double> detuning_grid(double half_span, std::size_t points) {
  if (!(half_span > 0.0) || points < 2) {
    throw Error(ErrorCode::invalid_argument, "detuning grid needs a positive span and 2+ points");
  }
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = -half_span + 2.0 * half_span * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return grid;
}

LineRates spectroscopic_rates(const Device& device, FluxBias flux) {
  LineRates r;
  r.gamma1 = device.emission_rate(flux.phi);
  const double nonradiative = device.transmon.gamma1_intrinsic + device.transmon.gamma_excitation_line;
  r.gamma2 = 0.5 * (r.gamma1 + nonradiative) + device.dephasing_rate(flux.phi);
  return r;
}

ReflectionTrace synthesize_trace(const Device& device, FluxBias flux,
                                 const std::vector<double>& detunings, double noise_sigma,
                                 std::uint64_t seed) {
  if (detunings.empty()) throw Error(ErrorCode::invalid_argument, "synthesize_trace: empty grid");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::invalid_argument, "synthesize_trace: negative noise");
  ReflectionTrace trace;
  trace.flux = flux;
  trace.omega_ref = device.transmon.omega01;
  trace.detunings = detunings;
  trace.noise_seed = seed;
  trace.noise_sigma = noise_sigma;
  const LineRates rates = spectroscopic_rates(device, flux);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  trace.r_values.reserve(detunings.size());
  for (double d : detunings) {
    std::complex<double> r = reflection_coefficient(rates.gamma1, rates.gamma2, d);
    if (noise_sigma > 0.0) {
      const double re = noise(rng);
      const double im = noise(rng);
      r += noise_sigma * std::complex<double>(re, im);
    }
    trace.r_values.push_back(r);
  }
  trace.validate();
  return trace;
}

FitResult fit_trace(const ReflectionTrace& trace) {
  trace.validate();
  const std::size_t n = trace.detunings.size();
  if (n < 5) throw Error(ErrorCode::invalid_argument, "fit_trace: need at least 5 points");

  // y = r + 1 is a complex Lorentzian Gamma_1 / (Gamma_2 + i (delta - delta0)).
  std::size_t peak = 0;
  double peak_abs = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::abs(trace.r_values[k] + 1.0);
    if (a > peak_abs) {
      peak_abs = a;
      peak = k;
    }
  }
  const double floor = 5.0 * trace.noise_sigma + 1e-9;
  const std::vector<std::string> names = {"gamma1", "gamma2", "omega01"};
  if (peak_abs <= floor) {
    FitResult r;
    r.names = names;
    r.values = {0.0, 0.0, trace.omega_ref};
    r.uncertainties = {0.0, 0.0, 0.0};
    r.degenerate = true;
    r.message = "no qubit response above the noise floor";
    return r;
  }

  // Half width at 1/sqrt(2) of the peak magnitude is Gamma_2.
  const double level = peak_abs / std::sqrt(2.0);
  std::size_t lo = peak, hi = peak;
  while (lo > 0 && std::abs(trace.r_values[lo - 1] + 1.0) >= level) --lo;
  while (hi + 1 < n && std::abs(trace.r_values[hi + 1] + 1.0) >= level) ++hi;
  const double spacing = (trace.detunings.back() - trace.detunings.front()) / static_cast<double>(n - 1);
  const double width = std::max(0.5 * (trace.detunings[hi] - trace.detunings[lo]), spacing);
  const double delta0 = trace.detunings[peak];

  // Fit in units of the width estimate so every parameter is of order one.
  const ResidualFn fn = [&](const std::vector<double>& p, std::vector<double>& res) {
    const double g1 = p[0] * width;
    const double g2 = p[1] * width;
    const double d0 = p[2] * width;
    for (std::size_t k = 0; k < n; ++k) {
      const std::complex<double> model = -1.0 + g1 / std::complex<double>(g2, trace.detunings[k] - d0);
      const std::complex<double> diff = model - trace.r_values[k];
      res[2 * k] = diff.real();
      res[2 * k + 1] = diff.imag();
    }
  };
  const std::vector<FitParameter> params = {
      {"gamma1", peak_abs, 1e-12, 1e6, ParamScale::log},
      {"gamma2", 1.0, 1e-12, 1e6, ParamScale::log},
      {"omega01", delta0 / width, -std::numeric_limits<double>::infinity(),
       std::numeric_limits<double>::infinity(), ParamScale::linear},
  };
  FitOptions opt;
  opt.polish = true;
  FitResult r = least_squares(fn, 2 * n, params, opt);
  for (std::size_t k = 0; k < 3; ++k) {
    r.values[k] *= width;
    r.uncertainties[k] *= width;
  }
  r.values[2] += trace.omega_ref;
  if (r.values[1] < 0.5 * r.values[0]) r.message = "fitted gamma2 below gamma1 / 2";
  const double span = trace.detunings.back() - trace.detunings.front();
  if (span < 3.0 * r.values[1]) r.message = "trace spans fewer than 3 linewidths";
  return r;
}

std::vector<SweepPoint> spectroscopy_sweep(const Device& device, const std::vector<double>& fluxes,
                                           const std::vector<double>& detunings, double noise_sigma,
                                           std::uint64_t seed, unsigned threads) {
  std::vector<SweepPoint> out(fluxes.size());
  parallel_for(fluxes.size(), threads, [&](std::size_t k) {
    const ReflectionTrace trace =
        synthesize_trace(device, FluxBias{fluxes[k]}, detunings, noise_sigma, split_seed(seed, k));
    const FitResult fit = fit_trace(trace);
    SweepPoint& p = out[k];
    p.point.flux = fluxes[k];
    p.degenerate = fit.degenerate;
    p.converged = fit.converged;
    p.point.gamma1 = fit.degenerate ? 0.0 : fit.value("gamma1");
    p.point.gamma2 = fit.degenerate ? 0.0 : fit.value("gamma2");
  });
  return out;
}

std::vector<FluxPoint> synthetic_flux_curve(const Device& device, const std::vector<double>& fluxes,
                                            double noise_fraction, std::uint64_t seed) {
  if (!(noise_fraction >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "synthetic_flux_curve: negative noise");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<FluxPoint> out;
  out.reserve(fluxes.size());
  for (double phi : fluxes) {
    const LineRates r = spectroscopic_rates(device, FluxBias{phi});
    double g1 = r.gamma1;
    if (noise_fraction > 0.0) g1 *= std::max(0.0, 1.0 + noise_fraction * noise(rng));
    out.push_back({phi, g1, r.gamma2});
  }
  return out;
}

CurveParams curve_params(const Device& device) {
  return CurveParams{device.squid.ic1, device.squid.ic2, device.squid.c_sq, device.coupling.c_s,
                     device.coupling.phi_off};
}

Device with_curve_params(Device device, const CurveParams& p) {
  device.squid.ic1 = p.ic1;
  device.squid.ic2 = p.ic2;
  device.squid.c_sq = p.c_sq;
  device.coupling.c_s = p.c_s;
  device.coupling.phi_off = p.phi_off;
  return device;
}

namespace {

void check_curve_points(const std::vector<FluxPoint>& points) {
  if (points.size() < 10) throw Error(ErrorCode::invalid_argument, "flux curve fit needs >= 10 points");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : points) {
    if (!std::isfinite(p.flux) || !std::isfinite(p.gamma1) || p.gamma1 < 0.0) {
      throw Error(ErrorCode::invalid_argument, "flux curve point is not finite and nonnegative");
    }
    lo = std::min(lo, p.flux);
    hi = std::max(hi, p.flux);
  }
  if (hi - lo < 0.9) {
    throw Error(ErrorCode::invalid_argument, "flux curve points must span at least one period");
  }
}

// Emission rate with c_s = 1 F, so that Gamma_1 = c_s^2 * shape.
double unit_shape(const Device& d, double phi) {
  Device u = d;
  u.coupling.c_s = 1.0;
  const double pref = emission_prefactor(u.coupling, u.line);
  return pref * spectral_density(FluxBias{phi}, u.transmon.omega01, u.coupling, u.line, u.squid);
}

struct CurveResidualModel {
  const std::vector<FluxPoint>& points;
  const Device& base;
  CurveResidual kind;
  double scale;    // largest measured rate
  double epsilon;  // floor for the logarithm

  void operator()(const CurveParams& p, std::vector<double>& r) const {
    const Device d = with_curve_params(base, p);
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double m = d.emission_rate(points[k].flux);
      if (kind == CurveResidual::logarithmic) {
        r[k] = std::log((m + epsilon) / (points[k].gamma1 + epsilon));
      } else {
        r[k] = (m - points[k].gamma1) / scale;
      }
    }
  }
};

}  // namespace

CurveParams landmark_guess(const std::vector<FluxPoint>& points, const Device& base) {
  check_curve_points(points);
  double ymax = 0.0;
  for (const auto& p : points) ymax = std::max(ymax, p.gamma1);
  if (ymax <= 0.0) throw Error(ErrorCode::invalid_argument, "flux curve has no emission");
  const double eps = 1e-4 * ymax;

  // Observed zero on the first half period.
  double zero = 0.39;
  double zmin = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const double w = wrap_unit(p.flux);
    if (w > 0.0 && w <= 0.5 && p.gamma1 < zmin) {
      zmin = p.gamma1;
      zero = w;
    }
  }

  CurveParams best{};
  double best_cost = std::numeric_limits<double>::infinity();
  const double omega = base.transmon.omega01;
  for (int a = 0; a < 10; ++a) {
    const double ic_sum = 20e-9 * std::pow(15.0, a / 9.0);  // 20 nA .. 300 nA
    for (int b = 0; b < 8; ++b) {
      const double asym = 0.9 * b / 7.0;
      for (int c = 0; c < 8; ++c) {
        const double c_sq = 5e-15 * std::pow(20.0, c / 7.0);  // 5 fF .. 100 fF
        CurveParams trial;
        trial.ic1 = 0.5 * ic_sum * (1.0 - asym);
        trial.ic2 = 0.5 * ic_sum * (1.0 + asym);
        trial.c_sq = c_sq;
        trial.c_s = 1.0;
        Device d = with_curve_params(base, trial);
        trial.phi_off = 0.5 * squid_phase(FluxBias{zero}, omega, d.line, d.squid) - 0.5 * pi;
        d.coupling.phi_off = trial.phi_off;

        std::vector<double> shape(points.size());
        double log_gap = 0.0;
        std::size_t used = 0;
        for (std::size_t k = 0; k < points.size(); ++k) {
          shape[k] = unit_shape(d, points[k].flux);
          if (points[k].gamma1 > 0.1 * ymax && shape[k] > 0.0) {
            log_gap += std::log(points[k].gamma1 / shape[k]);
            ++used;
          }
        }
        if (used == 0) continue;
        const double cs2 = std::exp(log_gap / static_cast<double>(used));
        double cost = 0.0;
        for (std::size_t k = 0; k < points.size(); ++k) {
          const double v = std::log((cs2 * shape[k] + eps) / (points[k].gamma1 + eps));
          cost += v * v;
        }
        if (cost < best_cost) {
          best_cost = cost;
          best = trial;
          best.c_s = std::min(std::sqrt(cs2), 0.99 * base.coupling.c_sigma);
        }
      }
    }
  }
  if (!std::isfinite(best_cost)) {
    throw Error(ErrorCode::convergence, "landmark search found no usable starting point");
  }
  return best;
}

FitResult fit_flux_curve(const std::vector<FluxPoint>& points, const Device& base,
                         const CurveFitOptions& options) {
  check_curve_points(points);
  base.validate();
  const CurveParams start = options.initial ? *options.initial : landmark_guess(points, base);

  double ymax = 0.0;
  for (const auto& p : points) ymax = std::max(ymax, p.gamma1);
  const CurveResidualModel model{points, base, options.residual, ymax, 1e-6 * ymax};
  // The optimizer sees the position of the first zero instead of phi_off:
  // the zero is pinned by the data, which removes most of the correlation
  // between phi_off and the SQUID parameters.
  const double omega = base.transmon.omega01;
  const auto offset_for_zero = [&](double ic1, double ic2, double c_sq, double zero) {
    SquidParams sq = base.squid;
    sq.ic1 = ic1;
    sq.ic2 = ic2;
    sq.c_sq = c_sq;
    return 0.5 * squid_phase(FluxBias{zero}, omega, base.line, sq) - 0.5 * pi;
  };
  const auto zero_for_offset = [&](const CurveParams& p) {
    const Device d = with_curve_params(base, p);
    const auto zeros = d.emission_zeros();
    for (double z : zeros) {
      if (z > 0.0 && z <= 0.5) return z;
    }
    return 0.25;
  };
  const ResidualFn fn = [&](const std::vector<double>& x, std::vector<double>& r) {
    model(CurveParams{x[0], x[1], x[2], x[3], offset_for_zero(x[0], x[1], x[2], x[4])}, r);
  };
  const double c_sigma = base.coupling.c_sigma;
  const std::vector<FitParameter> params = {
      {"ic1", std::min(start.ic1, start.ic2), 1e-12, 1e-3, ParamScale::log},
      {"ic2", std::max(start.ic1, start.ic2), 1e-12, 1e-3, ParamScale::log},
      {"c_sq", start.c_sq, 1e-18, 1e-9, ParamScale::log},
      {"c_s", std::min(start.c_s, 0.999 * c_sigma), 1e-18, 0.999 * c_sigma, ParamScale::log},
      {"zero", zero_for_offset(start), 1e-3, 0.5, ParamScale::linear},
  };
  FitOptions opt;
  opt.method = options.method;
  opt.polish = options.polish;
  opt.tolerance = 1e-9;
  opt.x_tolerance = 1e-6;
  opt.restarts = 2;
  opt.max_iterations = 5000;
  FitResult r = least_squares(fn, points.size(), params, opt);

  // Report phi_off and its uncertainty in the natural parametrization.
  r.names[4] = "phi_off";
  r.values[4] = offset_for_zero(r.values[0], r.values[1], r.values[2], r.values[4]);
  const ResidualFn natural = [&](const std::vector<double>& x, std::vector<double>& res) {
    model(CurveParams{x[0], x[1], x[2], x[3], x[4]}, res);
  };
  r.uncertainties = parameter_uncertainties(natural, points.size(), r.values);
  // The model is symmetric under exchanging the junctions; report ic1 <= ic2.
  if (r.values[0] > r.values[1]) {
    std::swap(r.values[0], r.values[1]);
    std::swap(r.uncertainties[0], r.uncertainties[1]);
  }
  return r;
}

double on_off_ratio(const Device& device, double step) {
  if (!(step > 0.0) || step > 0.5) throw Error(ErrorCode::invalid_argument, "on_off_ratio: bad step");
  const auto n = static_cast<std::size_t>(std::llround(1.0 / step));
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double g = device.emission_rate(static_cast<double>(k) * step);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

double infer_line_length(FluxBias decoupling_flux, double omega01, double v) {
  const double phi = decoupling_flux.phi;
  if (!(phi > 0.0 && phi <= 0.5)) {
    throw Error(ErrorCode::out_of_range, "decoupling flux must lie in (0, 1/2]");
  }
  if (!(omega01 > 0.0) || !(v > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "infer_line_length: omega01 and v must be positive");
  }
  const double offset = (0.5 - phi) / 0.5;
  const double wavelength = constants::two_pi * v / omega01;
  return (1.0 + offset) * wavelength / 4.0;
}

}  // namespace photongen
