#pragma once

// Quadrature noise of the reflected field. Each sideband w0 +- Omega sees the
// cavity as an attenuating phase shifter; what is lost is replaced by vacuum.
// Variances are in shot-noise units (vacuum = 1).

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "crit/error.hpp"
#include "crit/optics.hpp"

namespace crit {

/// Quadrature variances of the injected field. X and Y are uncorrelated.
struct InputGaussianState {
  double var_x = 1.0;
  double var_y = 1.0;

  static constexpr double kUncertaintySlack = 1e-9;

  static InputGaussianState vacuum() { return {1.0, 1.0}; }

  void validate() const {
    if (!(var_x > 0.0 && std::isfinite(var_x)) || !(var_y > 0.0 && std::isfinite(var_y)))
      throw InputError("input variances must be positive and finite");
    if (var_x * var_y < 1.0 - kUncertaintySlack)
      throw InputError("input state violates the uncertainty bound: var_x*var_y = " +
                       std::to_string(var_x * var_y));
  }

  bool operator==(const InputGaussianState&) const = default;
};

/// Pure squeezed vacuum with squeezing factor s: (e^{-2s}, e^{2s}).
inline InputGaussianState input_from_squeeze_factor(double s) {
  if (!std::isfinite(s)) throw InputError("squeeze factor must be finite");
  return {std::exp(-2.0 * s), std::exp(2.0 * s)};
}

/// Possibly impure state from measured squeezing / antisqueezing levels.
inline InputGaussianState input_from_db(double squeeze_db, double antisqueeze_db) {
  if (!(squeeze_db >= 0.0 && std::isfinite(squeeze_db)) ||
      !(antisqueeze_db >= 0.0 && std::isfinite(antisqueeze_db)))
    throw InputError("squeezing and antisqueezing levels must be finite and >= 0 dB");
  InputGaussianState state{std::pow(10.0, -squeeze_db / 10.0), std::pow(10.0, antisqueeze_db / 10.0)};
  state.validate();
  return state;
}

inline double variance_to_db(double v) { return 10.0 * std::log10(v); }

/// Reflection response at the upper and lower sideband of a carrier.
struct SidebandResponsePair {
  PolarResponse plus;
  PolarResponse minus;
  double omega_hz = 0.0;
  double detuning_hz = 0.0;
};

struct QuadratureVariances {
  double var_x = 1.0;
  double var_y = 1.0;
};

/// Homodyne detection: efficiency eta (visibility squared) and LO phase.
struct DetectionModel {
  double eta = 1.0;
  double lo_phase = 0.0;

  static DetectionModel from_visibility(double visibility, double lo_phase = 0.0) {
    DetectionModel det{visibility * visibility, lo_phase};
    det.validate();
    return det;
  }

  void validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw InputError("detection efficiency must lie in (0, 1]");
    if (!std::isfinite(lo_phase)) throw InputError("LO phase must be finite");
  }

  bool operator==(const DetectionModel&) const = default;
};

/// Sidebands around an arbitrary carrier phase pair. The sideband offset
/// adds 2 pi Omega / FSR_j to each cavity's round-trip phase.
inline SidebandResponsePair sideband_pair_at(const CoupledCavityConfig& config, PhasePair carrier,
                                             double omega_hz, double detuning_hz = 0.0) {
  if (!(omega_hz >= 0.0 && std::isfinite(omega_hz)))
    throw InputError("sideband frequency must be finite and >= 0");
  const PhasePair offset = round_trip_phase(config, omega_hz);
  const PhasePair up{carrier.phi1 + offset.phi1, carrier.phi2 + offset.phi2};
  const PhasePair down{carrier.phi1 - offset.phi1, carrier.phi2 - offset.phi2};
  return {to_polar(cavity_response(config, up)), to_polar(cavity_response(config, down)), omega_hz,
          detuning_hz};
}

/// Co-scanned sidebands at laser detuning `detuning_hz` from co-resonance.
inline SidebandResponsePair sideband_pair(const CoupledCavityConfig& config, double detuning_hz,
                                          double omega_hz) {
  return sideband_pair_at(config, round_trip_phase(config, detuning_hz), omega_hz, detuning_hz);
}

namespace detail {

struct SidebandCoefficients {
  std::complex<double> a;  // rho+ e^{i theta+}
  std::complex<double> b;  // rho- e^{-i theta-}
  double u;                // vacuum admixture at the upper sideband
  double v;                // ... and at the lower one
};

inline SidebandCoefficients coefficients(const SidebandResponsePair& pair) {
  auto leak = [](double rho) {
    const double r = std::min(rho, 1.0);
    return std::sqrt(1.0 - r * r);
  };
  return {std::polar(pair.plus.rho, pair.plus.theta), std::polar(pair.minus.rho, -pair.minus.theta),
          leak(pair.plus.rho), leak(pair.minus.rho)};
}

}  // namespace detail

/// Amplitude-quadrature variance of the reflected field.
inline double variance_x(const SidebandResponsePair& pair, const InputGaussianState& input) {
  const auto c = detail::coefficients(pair);
  return 0.25 * std::norm(c.a + c.b) * input.var_x + 0.25 * std::norm(c.a - c.b) * input.var_y +
         0.25 * (c.u + c.v) * (c.u + c.v) + 0.25 * (c.u - c.v) * (c.u - c.v);
}

/// Phase-quadrature variance of the reflected field.
inline double variance_y(const SidebandResponsePair& pair, const InputGaussianState& input) {
  const auto c = detail::coefficients(pair);
  return 0.25 * std::norm(-c.a + c.b) * input.var_x + 0.25 * std::norm(c.a + c.b) * input.var_y +
         0.25 * (-c.u + c.v) * (-c.u + c.v) + 0.25 * (c.u + c.v) * (c.u + c.v);
}

/// Variance of X cos(phase) + Y sin(phase). Reduces to variance_x at 0 and
/// variance_y at pi/2.
namespace detail {

// e^{i theta}, reduced by quarter turns first so multiples of pi/2 come out exact.
inline std::complex<double> unit_phase(double theta) {
  const double q = std::nearbyint(theta / (std::numbers::pi / 2));
  const double r = theta - q * (std::numbers::pi / 2);
  std::complex<double> z{std::cos(r), std::sin(r)};
  switch (static_cast<long long>(std::fmod(q, 4.0) + 4.0) % 4) {
    case 1: z = {-z.imag(), z.real()}; break;
    case 2: z = -z; break;
    case 3: z = {z.imag(), -z.real()}; break;
    default: break;
  }
  return z;
}

}  // namespace detail

inline double variance_at_angle(const SidebandResponsePair& pair, const InputGaussianState& input,
                                double lo_phase) {
  const auto c = detail::coefficients(pair);
  const std::complex<double> down = detail::unit_phase(-lo_phase);
  const std::complex<double> up = detail::unit_phase(lo_phase);
  const std::complex<double> a = c.a * down;
  const std::complex<double> b = c.b * up;
  const std::complex<double> u = c.u * down;
  const std::complex<double> v = c.v * up;
  return 0.25 * std::norm(a + b) * input.var_x + 0.25 * std::norm(a - b) * input.var_y +
         0.25 * std::norm(u + v) + 0.25 * std::norm(u - v);
}

inline QuadratureVariances quadrature_variances(const SidebandResponsePair& pair,
                                                const InputGaussianState& input) {
  return {variance_x(pair, input), variance_y(pair, input)};
}

/// Finite homodyne efficiency mixes in vacuum: eta v + (1 - eta).
inline double apply_detection(double v, const DetectionModel& det) {
  return det.eta * v + (1.0 - det.eta);
}

}  // namespace crit
