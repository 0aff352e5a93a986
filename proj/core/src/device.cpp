#include "photongen/device.hpp"

#include <cmath>

#include "photongen/constants.hpp"
#include "photongen/errors.hpp"

namespace photongen {
namespace {

using constants::two_pi;

constexpr double kGHz = 1e9;
constexpr double kMHz = 1e6;

// Signed amplitude whose square is proportional to Gamma_1; it changes sign
// at every emission zero.
double node_amplitude(const Device& d, double phi) {
  return std::cos(0.5 * squid_phase(FluxBias{phi}, d.transmon.omega01, d.line, d.squid) -
                  d.coupling.phi_off);
}

double bisect_zero(const Device& d, double lo, double hi) {
  double flo = node_amplitude(d, lo);
  for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = node_amplitude(d, mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void Device::validate() const {
  line.validate();
  squid.validate();
  coupling.validate();
  transmon.validate();
}

double Device::emission_rate(double phi) const {
  return photongen::emission_rate(FluxBias{phi}, coupling, line, squid, transmon.omega01);
}

double Device::max_emission_rate() const {
  constexpr int n = 2000;
  int best = 0;
  double best_rate = -1.0;
  for (int k = 0; k < n; ++k) {
    const double r = emission_rate(static_cast<double>(k) / n);
    if (r > best_rate) {
      best_rate = r;
      best = k;
    }
  }
  // Golden-section refinement inside the bracketing grid cells.
  double a = static_cast<double>(best - 1) / n;
  double b = static_cast<double>(best + 1) / n;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), e = a + g * (b - a);
  double fc = emission_rate(c), fe = emission_rate(e);
  for (int k = 0; k < 80; ++k) {
    if (fc > fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - g * (b - a);
      fc = emission_rate(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + g * (b - a);
      fe = emission_rate(e);
    }
  }
  return std::max({best_rate, fc, fe});
}

std::vector<double> Device::emission_zeros() const {
  constexpr int n = 4000;
  std::vector<double> zeros;
  double prev = node_amplitude(*this, 0.0);
  if (prev == 0.0) zeros.push_back(0.0);
  for (int k = 1; k <= n; ++k) {
    const double phi = static_cast<double>(k) / n;
    const double cur = node_amplitude(*this, phi);
    if (k < n && cur == 0.0) {
      zeros.push_back(phi);
    } else if ((cur < 0.0) != (prev < 0.0) && prev != 0.0) {
      const double z = bisect_zero(*this, static_cast<double>(k - 1) / n, phi);
      if (z < 1.0) zeros.push_back(z);
    }
    prev = cur;
  }
  return zeros;
}

double Device::decoupling_flux() const {
  for (double z : emission_zeros()) {
    if (z > 0.0 && z <= 0.5) return z;
  }
  throw Error(ErrorCode::out_of_range, "emission rate has no zero in (0, 1/2]");
}

double Device::dephasing_rate(double phi) const {
  return transmon.gammaphi_intrinsic + transmon.gammaphi_flux.at(phi);
}

Device paper2017_device() {
  Device d;

  const double f01 = 3.690 * kGHz;
  const double line_length = 9.49e-3;
  // The line is a quarter wave plus the 22% offset seen at the decoupling flux.
  const double wavelength = 4.0 * line_length / 1.22;
  d.line.z0 = 50.0;
  d.line.v = wavelength * f01;
  d.line.l0 = d.line.z0 / d.line.v;
  d.line.x_qubit = line_length;

  d.squid.ic1 = 30e-9;
  d.squid.ic2 = 46e-9;
  d.squid.c_sq = 33e-15;
  d.squid.mutual = 4e-12;

  const double e_c = constants::planck * f01 / (std::sqrt(8.0 * 91.0) - 1.0);
  d.coupling.c_s = 31e-15;
  d.coupling.c_sigma = 136e-15;
  d.coupling.e_c = e_c;
  d.coupling.e_j = 91.0 * e_c;
  d.coupling.phi_off = -0.1732;

  TransmonParams& t = d.transmon;
  t.omega01 = two_pi * f01;
  t.alpha = two_pi * -141.7 * kMHz;
  t.levels = 3;
  t.gamma1_intrinsic = 1.0 / 2.86e-6;
  t.gammaphi_intrinsic = 1.0 / 1.33e-6 - 0.5 / 2.86e-6;
  t.t_eff = 0.090;
  t.t_line = 0.0;
  t.gamma_excitation_line = 0.0;
  // Excess pure dephasing (Gamma_phi / 2 pi, MHz) on top of the intrinsic
  // value; zero around the decoupling points, saturating near integer flux.
  const std::vector<double> table_flux = {0.0,  0.10, 0.25, 0.36, 0.39,
                                          0.45, 0.50, 0.55, 0.61, 0.64,
                                          0.75, 0.90};
  const std::vector<double> table_mhz = {0.509, 0.509, 0.30, 0.0,  0.0,
                                         0.204, 0.23,  0.204, 0.0, 0.0,
                                         0.30,  0.509};
  t.gammaphi_flux.flux = table_flux;
  for (double v : table_mhz) t.gammaphi_flux.value.push_back(two_pi * v * kMHz);
  return d;
}

Device estimated_device() {
  Device d = paper2017_device();
  d.coupling.c_s = 28e-15;
  return d;
}

Device device_preset(const std::string& name) {
  if (name == "paper2017") return paper2017_device();
  if (name == "estimated") return estimated_device();
  throw Error(ErrorCode::invalid_argument, "unknown device preset '" + name + "'");
}

}  // namespace photongen
