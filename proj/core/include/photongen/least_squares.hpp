#pragma once

// Bounded nonlinear least squares shared by the spectroscopy fits and the
// time-domain figure-of-merit extraction.

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace photongen {

enum class FitMethod { nelder_mead, levenberg_marquardt };

/// Log-scaled parameters are optimized as log(x), which keeps them positive
/// and evens out parameters that span many decades.
enum class ParamScale { linear, log };

struct FitParameter {
  std::string name;
  double initial = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  ParamScale scale = ParamScale::linear;
};

struct FitOptions {
  FitMethod method = FitMethod::nelder_mead;
  int max_iterations = 20000;
  double tolerance = 1e-12;    // relative spread of the cost over the simplex
  double x_tolerance = 1e-9;   // relative simplex size
  int restarts = 4;          // Nelder-Mead restarts from the current best point
  bool polish = false;       // finish a Nelder-Mead run with Levenberg-Marquardt
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> uncertainties;  // 1 sigma from s^2 (J^T J)^-1
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  bool degenerate = false;
  std::string message;

  double value(const std::string& name) const;
  double uncertainty(const std::string& name) const;
};

using ResidualFn = std::function<void(const std::vector<double>& params, std::vector<double>& residuals)>;

/// Minimizes the sum of squared residuals over the box given by `params`.
FitResult least_squares(const ResidualFn& residuals, std::size_t n_residuals,
                        const std::vector<FitParameter>& params, const FitOptions& options = {});

/// Central-difference Jacobian of the residuals in natural parameter units.
std::vector<std::vector<double>> numerical_jacobian(const ResidualFn& residuals,
                                                    std::size_t n_residuals,
                                                    const std::vector<double>& at);

/// 1 sigma uncertainties s^2 (J^T J)^-1 at `at`, with s^2 the residual
/// variance per degree of freedom.
std::vector<double> parameter_uncertainties(const ResidualFn& residuals, std::size_t n_residuals,
                                            const std::vector<double>& at,
                                            bool* rank_deficient = nullptr);

/// Fits y = A exp(-t / T) (+ C). Parameters: "amplitude", "tau", "offset".
/// A flat series yields tau = +inf with `degenerate` set.
FitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                          bool with_offset = true);

/// Fits y = A exp(-t / T) cos(2 pi f t + p) + C. Parameters: "amplitude",
/// "tau", "frequency", "phase", "offset". A series without oscillation is
/// reported as degenerate and not converged.
FitResult fit_damped_sinusoid(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace photongen
