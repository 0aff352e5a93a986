#include "photongen/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "photongen/constants.hpp"
#include "photongen/errors.hpp"

namespace photongen {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Maps between natural parameter values and the unconstrained-ish internal
// coordinates the optimizers see; bounds are enforced by projection.
class Transform {
 public:
  explicit Transform(const std::vector<FitParameter>& params) : params_(params) {
    for (const auto& p : params_) {
      if (p.scale == ParamScale::log) {
        lo_.push_back(p.lower > 0.0 ? std::log(p.lower) : -kInf);
        hi_.push_back(std::isfinite(p.upper) ? std::log(p.upper) : kInf);
      } else {
        lo_.push_back(p.lower);
        hi_.push_back(p.upper);
      }
    }
  }

  std::size_t size() const { return params_.size(); }

  Eigen::VectorXd to_internal(const std::vector<double>& x) const {
    Eigen::VectorXd u(static_cast<Eigen::Index>(x.size()));
    for (std::size_t k = 0; k < x.size(); ++k) {
      u[static_cast<Eigen::Index>(k)] = params_[k].scale == ParamScale::log ? std::log(x[k]) : x[k];
    }
    return project(u);
  }

  Eigen::VectorXd project(const Eigen::VectorXd& u) const {
    Eigen::VectorXd v = u;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      v[k] = std::clamp(v[k], lo_[static_cast<std::size_t>(k)], hi_[static_cast<std::size_t>(k)]);
    }
    return v;
  }

  std::vector<double> to_natural(const Eigen::VectorXd& u) const {
    const Eigen::VectorXd v = project(u);
    std::vector<double> x(size());
    for (std::size_t k = 0; k < size(); ++k) {
      const double w = v[static_cast<Eigen::Index>(k)];
      x[k] = params_[k].scale == ParamScale::log ? std::exp(w) : w;
    }
    return x;
  }

  // Initial simplex edge in internal units.
  double step(std::size_t k, double u) const {
    if (params_[k].scale == ParamScale::log) return 0.1;
    const double s = 0.1 * std::abs(u);
    if (s > 0.0) return s;
    const double span = hi_[k] - lo_[k];
    return std::isfinite(span) ? 0.1 * span : 0.1;
  }

 private:
  std::vector<FitParameter> params_;
  std::vector<double> lo_, hi_;
};

class Objective {
 public:
  Objective(const ResidualFn& fn, std::size_t m, const Transform& tr)
      : fn_(fn), m_(m), tr_(tr), buf_(m) {}

  double cost(const Eigen::VectorXd& u) {
    residuals(u, buf_);
    double s = 0.0;
    for (double r : buf_) s += r * r;
    return std::isfinite(s) ? s : kInf;
  }

  void residuals(const Eigen::VectorXd& u, std::vector<double>& r) {
    r.assign(m_, 0.0);
    fn_(tr_.to_natural(u), r);
    if (r.size() != m_) throw Error(ErrorCode::invalid_argument, "residual count changed during fit");
    ++evaluations;
  }

  std::size_t size() const { return m_; }
  long evaluations = 0;

 private:
  const ResidualFn& fn_;
  std::size_t m_;
  const Transform& tr_;
  std::vector<double> buf_;
};

struct NmOutcome {
  Eigen::VectorXd best;
  double cost = kInf;
  int iterations = 0;
  bool converged = false;
};

NmOutcome nelder_mead(Objective& obj, const Transform& tr, Eigen::VectorXd start, int max_iter,
                      double ftol, double xtol) {
  const auto n = start.size();
  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), start);
  std::vector<double> f(static_cast<std::size_t>(n + 1));
  for (Eigen::Index k = 0; k < n; ++k) {
    simplex[static_cast<std::size_t>(k + 1)][k] += tr.step(static_cast<std::size_t>(k), start[k]);
    simplex[static_cast<std::size_t>(k + 1)] = tr.project(simplex[static_cast<std::size_t>(k + 1)]);
  }
  for (std::size_t k = 0; k < simplex.size(); ++k) f[k] = obj.cost(simplex[k]);

  std::vector<std::size_t> order(simplex.size());
  NmOutcome out;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    double size = 0.0;
    for (const auto& v : simplex) {
      for (Eigen::Index k = 0; k < n; ++k) {
        size = std::max(size, std::abs(v[k] - simplex[best][k]) / (1.0 + std::abs(simplex[best][k])));
      }
    }
    const double spread = f[worst] - f[best];
    if (size < xtol && (spread <= ftol * std::abs(f[best]) || size < 1e-2 * xtol)) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < simplex.size(); ++k) {
      if (k != worst) centroid += simplex[k];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = tr.project(centroid + (centroid - simplex[worst]));
    const double fr = obj.cost(xr);
    if (fr < f[best]) {
      const Eigen::VectorXd xe = tr.project(centroid + 2.0 * (centroid - simplex[worst]));
      const double fe = obj.cost(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        f[worst] = fe;
      } else {
        simplex[worst] = xr;
        f[worst] = fr;
      }
      continue;
    }
    if (fr < f[second]) {
      simplex[worst] = xr;
      f[worst] = fr;
      continue;
    }
    const bool outside = fr < f[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(tr.project(centroid + 0.5 * (xr - centroid)))
                                       : Eigen::VectorXd(tr.project(centroid + 0.5 * (simplex[worst] - centroid)));
    const double fc = obj.cost(xc);
    if (fc < std::min(fr, f[worst])) {
      simplex[worst] = xc;
      f[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k < simplex.size(); ++k) {
      if (k == best) continue;
      simplex[k] = tr.project(simplex[best] + 0.5 * (simplex[k] - simplex[best]));
      f[k] = obj.cost(simplex[k]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
  out.best = simplex[best];
  out.cost = f[best];
  out.iterations = it;
  return out;
}

struct LmFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  Objective* obj;
  const Transform* tr;
  int n_inputs;
  int n_values;

  int inputs() const { return n_inputs; }
  int values() const { return n_values; }

  int operator()(const Eigen::VectorXd& u, Eigen::VectorXd& fvec) const {
    std::vector<double> r;
    obj->residuals(tr->project(u), r);
    fvec.resize(n_values);
    for (int k = 0; k < n_values; ++k) {
      fvec[k] = std::isfinite(r[static_cast<std::size_t>(k)]) ? r[static_cast<std::size_t>(k)] : 1e150;
    }
    return 0;
  }
};

struct LmOutcome {
  Eigen::VectorXd best;
  double cost = kInf;
  int iterations = 0;
  bool converged = false;
};

LmOutcome levenberg_marquardt(Objective& obj, const Transform& tr, Eigen::VectorXd start,
                              int max_iter) {
  LmFunctor f{&obj, &tr, static_cast<int>(start.size()), static_cast<int>(obj.size())};
  LmOutcome out;
  if (f.n_values < f.n_inputs) {
    out.best = start;
    out.cost = obj.cost(start);
    return out;
  }
  Eigen::NumericalDiff<LmFunctor, Eigen::Central> numdiff(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<LmFunctor, Eigen::Central>> lm(numdiff);
  lm.parameters.maxfev = max_iter;
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-16;
  const auto status = lm.minimize(start);
  out.best = tr.project(start);
  out.cost = obj.cost(out.best);
  out.iterations = static_cast<int>(lm.nfev);
  using Status = Eigen::LevenbergMarquardtSpace::Status;
  out.converged = status == Status::RelativeErrorTooSmall ||
                  status == Status::RelativeReductionTooSmall ||
                  status == Status::RelativeErrorAndReductionTooSmall ||
                  status == Status::CosinusTooSmall || status == Status::FtolTooSmall ||
                  status == Status::XtolTooSmall || status == Status::GtolTooSmall;
  return out;
}

}  // namespace

double FitResult::value(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return values[k];
  }
  throw Error(ErrorCode::invalid_argument, "fit has no parameter '" + name + "'");
}

double FitResult::uncertainty(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return uncertainties[k];
  }
  throw Error(ErrorCode::invalid_argument, "fit has no parameter '" + name + "'");
}

std::vector<std::vector<double>> numerical_jacobian(const ResidualFn& residuals,
                                                    std::size_t n_residuals,
                                                    const std::vector<double>& at) {
  std::vector<std::vector<double>> jac(n_residuals, std::vector<double>(at.size(), 0.0));
  std::vector<double> rp(n_residuals), rm(n_residuals);
  for (std::size_t k = 0; k < at.size(); ++k) {
    const double h = 1e-6 * std::max(std::abs(at[k]), 1e-300) + (at[k] == 0.0 ? 1e-8 : 0.0);
    std::vector<double> xp = at, xm = at;
    xp[k] += h;
    xm[k] -= h;
    rp.assign(n_residuals, 0.0);
    rm.assign(n_residuals, 0.0);
    residuals(xp, rp);
    residuals(xm, rm);
    for (std::size_t i = 0; i < n_residuals; ++i) jac[i][k] = (rp[i] - rm[i]) / (2.0 * h);
  }
  return jac;
}

std::vector<double> parameter_uncertainties(const ResidualFn& residuals, std::size_t n_residuals,
                                            const std::vector<double>& at, bool* rank_deficient) {
  const auto jac = numerical_jacobian(residuals, n_residuals, at);
  std::vector<double> r(n_residuals, 0.0);
  residuals(at, r);
  double cost = 0.0;
  for (double v : r) cost += v * v;

  const auto n = static_cast<Eigen::Index>(at.size());
  Eigen::MatrixXd j(static_cast<Eigen::Index>(n_residuals), n);
  for (std::size_t i = 0; i < n_residuals; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) j(static_cast<Eigen::Index>(i), k) = jac[i][static_cast<std::size_t>(k)];
  }
  const double dof = n_residuals > at.size() ? static_cast<double>(n_residuals - at.size()) : 1.0;
  const double s2 = cost / dof;
  // Column scaling keeps the normal matrix well conditioned when parameters
  // differ by many orders of magnitude.
  Eigen::VectorXd scale(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double c = j.col(k).norm();
    scale[k] = c > 0.0 ? c : 1.0;
  }
  const Eigen::MatrixXd js = j * scale.cwiseInverse().asDiagonal();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(js.transpose() * js);
  const Eigen::MatrixXd cov_s = cod.pseudoInverse() * s2;
  std::vector<double> sigma(at.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const double var = cov_s(k, k) / (scale[k] * scale[k]);
    sigma[static_cast<std::size_t>(k)] = std::sqrt(std::max(0.0, var));
  }
  if (rank_deficient != nullptr) *rank_deficient = cod.rank() < n;
  return sigma;
}

FitResult least_squares(const ResidualFn& residuals, std::size_t n_residuals,
                        const std::vector<FitParameter>& params, const FitOptions& options) {
  if (params.empty()) throw Error(ErrorCode::invalid_argument, "fit needs at least one parameter");
  if (n_residuals == 0) throw Error(ErrorCode::invalid_argument, "fit needs at least one residual");
  std::vector<double> x0;
  for (const auto& p : params) {
    if (!(p.lower <= p.upper)) {
      throw Error(ErrorCode::invalid_argument, "parameter '" + p.name + "' has an empty range");
    }
    if (p.scale == ParamScale::log && !(p.initial > 0.0)) {
      throw Error(ErrorCode::invalid_argument,
                  "log-scaled parameter '" + p.name + "' needs a positive start");
    }
    if (!std::isfinite(p.initial)) {
      throw Error(ErrorCode::invalid_argument, "parameter '" + p.name + "' has no finite start");
    }
    x0.push_back(p.initial);
  }

  const Transform tr(params);
  Objective obj(residuals, n_residuals, tr);
  Eigen::VectorXd u = tr.to_internal(x0);
  double cost = obj.cost(u);
  int iterations = 0;
  bool converged = false;

  if (options.method == FitMethod::nelder_mead) {
    for (int round = 0; round <= options.restarts; ++round) {
      const NmOutcome nm = nelder_mead(obj, tr, u, options.max_iterations, options.tolerance,
                                       options.x_tolerance);
      iterations += nm.iterations;
      const double previous = cost;
      if (nm.cost <= cost) {
        u = nm.best;
        cost = nm.cost;
      }
      converged = nm.converged;
      // Restart from the best vertex until a fresh simplex stops improving.
      if (round > 0 && previous - cost <= options.tolerance * std::max(previous, 1e-300)) break;
    }
    if (options.polish) {
      const LmOutcome lm = levenberg_marquardt(obj, tr, u, options.max_iterations);
      iterations += lm.iterations;
      if (lm.cost <= cost) {
        u = lm.best;
        cost = lm.cost;
      }
    }
  } else {
    const LmOutcome lm = levenberg_marquardt(obj, tr, u, options.max_iterations);
    iterations = lm.iterations;
    converged = lm.converged;
    if (lm.cost <= cost) {
      u = lm.best;
      cost = lm.cost;
    }
  }

  FitResult result;
  for (const auto& p : params) result.names.push_back(p.name);
  result.values = tr.to_natural(u);
  result.residual_norm = std::sqrt(cost);
  result.converged = converged && std::isfinite(cost);
  result.iterations = iterations;

  bool rank_deficient = false;
  result.uncertainties = parameter_uncertainties(residuals, n_residuals, result.values, &rank_deficient);
  result.degenerate = rank_deficient;
  return result;
}

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_series(const std::vector<double>& t, const std::vector<double>& y, std::size_t min_points) {
  if (t.size() != y.size()) throw Error(ErrorCode::invalid_argument, "fit: t and y lengths differ");
  if (t.size() < min_points) throw Error(ErrorCode::invalid_argument, "fit: too few points");
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (!(t[k] > t[k - 1])) throw Error(ErrorCode::invalid_argument, "fit: t must increase");
  }
}

FitResult flat_result(std::vector<std::string> names, std::vector<double> values, const std::string& why) {
  FitResult r;
  r.names = std::move(names);
  r.values = std::move(values);
  r.uncertainties.assign(r.values.size(), 0.0);
  r.degenerate = true;
  r.converged = false;
  r.message = why;
  return r;
}

}  // namespace

FitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                          bool with_offset) {
  check_series(t, y, with_offset ? 4 : 3);
  double ymax = 0.0;
  for (double v : y) ymax = std::max(ymax, std::abs(v));
  if (ymax == 0.0 || (with_offset && std::abs(y.front() - y.back()) <= 1e-12 * ymax)) {
    return flat_result({"amplitude", "tau", "offset"}, {0.0, kInf, mean(y)}, "no decay");
  }

  // Work in units of the window length and the largest sample.
  const double t0 = t.front();
  const double span = t.back() - t0;
  std::vector<double> s(t.size()), yn(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    s[k] = (t[k] - t0) / span;
    yn[k] = y[k] / ymax;
  }

  // Start: offset from the tail, tau from the 1/e crossing of the rest.
  const double c0 = with_offset ? yn.back() : 0.0;
  const double a0 = yn.front() - c0;
  double tau0 = 1.0 / 3.0;
  for (std::size_t k = 1; k < yn.size(); ++k) {
    if (std::abs(yn[k] - c0) <= std::abs(a0) / std::exp(1.0)) {
      tau0 = s[k];
      break;
    }
  }
  const double n = static_cast<double>(t.size());
  std::vector<FitParameter> params = {
      {"amplitude", a0, -kInf, kInf, ParamScale::linear},
      {"tau", tau0, 1e-3 / n, 1e6, ParamScale::log},
  };
  if (with_offset) params.push_back({"offset", c0, -kInf, kInf, ParamScale::linear});

  const ResidualFn fn = [&](const std::vector<double>& p, std::vector<double>& r) {
    const double c = with_offset ? p[2] : 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) r[k] = p[0] * std::exp(-s[k] / p[1]) + c - yn[k];
  };
  FitOptions opt;
  opt.polish = true;
  FitResult r = least_squares(fn, s.size(), params, opt);

  const double tau = r.values[1] * span;
  // Amplitude referred to t = 0 rather than to the first sample.
  const double shift = std::exp(t0 / tau);
  r.values[0] *= ymax * shift;
  r.uncertainties[0] *= ymax * shift;
  r.values[1] = tau;
  r.uncertainties[1] *= span;
  r.residual_norm *= ymax;
  if (with_offset) {
    r.values[2] *= ymax;
    r.uncertainties[2] *= ymax;
  } else {
    r.names.push_back("offset");
    r.values.push_back(0.0);
    r.uncertainties.push_back(0.0);
  }
  if (tau > 1e5 * span) {
    r.degenerate = true;
    r.values[1] = kInf;
    r.message = "no decay within the window";
  }
  return r;
}

FitResult fit_damped_sinusoid(const std::vector<double>& t, const std::vector<double>& y) {
  check_series(t, y, 6);
  const std::vector<std::string> names = {"amplitude", "tau", "frequency", "phase", "offset"};
  double ymax = 0.0;
  for (double v : y) ymax = std::max(ymax, std::abs(v));
  const double c_raw = mean(y);
  double dev_raw = 0.0;
  for (double v : y) dev_raw = std::max(dev_raw, std::abs(v - c_raw));
  if (ymax == 0.0 || dev_raw <= 1e-9 * ymax) {
    return flat_result(names, {0.0, kInf, 0.0, 0.0, c_raw}, "no oscillation");
  }

  const double t0 = t.front();
  const double span = t.back() - t0;
  std::vector<double> s(t.size()), yn(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    s[k] = (t[k] - t0) / span;
    yn[k] = y[k] / ymax;
  }
  const double c0 = c_raw / ymax;
  const double dev = dev_raw / ymax;

  // Frequency start from the peak of a direct Fourier scan of the detrended data.
  const double n = static_cast<double>(t.size());
  const double fmax = 0.5 * (n - 1.0);
  double best_f = 0.0, best_p = -1.0, best_phase = 0.0;
  for (double f = 0.25; f <= fmax; f += 0.25) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      acc += (yn[k] - c0) * std::polar(1.0, -constants::two_pi * f * s[k]);
    }
    const double p = std::norm(acc);
    if (p > best_p) {
      best_p = p;
      best_f = f;
      best_phase = std::arg(acc);
    }
  }
  // Demand at least one full period inside the window.
  if (best_f < 1.0) {
    return flat_result(names, {dev_raw, kInf, best_f / span, 0.0, c_raw}, "no oscillation");
  }

  const std::vector<FitParameter> params = {
      {"amplitude", dev, 0.0, kInf, ParamScale::linear},
      {"tau", 0.5, 1.0 / n, 1e6, ParamScale::log},
      {"frequency", best_f, 0.0, fmax, ParamScale::linear},
      {"phase", best_phase, -kInf, kInf, ParamScale::linear},
      {"offset", c0, -kInf, kInf, ParamScale::linear},
  };
  const ResidualFn fn = [&](const std::vector<double>& p, std::vector<double>& r) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      r[k] = p[0] * std::exp(-s[k] / p[1]) * std::cos(constants::two_pi * p[2] * s[k] + p[3]) + p[4] -
             yn[k];
    }
  };
  FitOptions opt;
  opt.polish = true;
  FitResult r = least_squares(fn, s.size(), params, opt);

  const double tau = r.values[1] * span;
  const double freq = r.values[2] / span;
  const double shift = std::exp(t0 / tau);
  r.values[0] *= ymax * shift;
  r.uncertainties[0] *= ymax * shift;
  r.values[1] = tau;
  r.uncertainties[1] *= span;
  r.values[2] = freq;
  r.uncertainties[2] /= span;
  r.values[3] = std::remainder(r.values[3] - constants::two_pi * freq * t0, constants::two_pi);
  r.values[4] *= ymax;
  r.uncertainties[4] *= ymax;
  r.residual_norm *= ymax;
  return r;
}

}  // namespace photongen
