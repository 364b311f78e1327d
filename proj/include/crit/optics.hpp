#pragma once

// Reflection response of a single Fabry-Perot cavity and of two directly
// coupled cavities M0 | C1 | M1 | C2 | M2, light incident on M2.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "crit/error.hpp"

namespace crit {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using ComplexAmplitude = std::complex<double>;

enum class ModelVariant {
  SymmetricNumerator,  // (r1 - r0 t1 e^{i phi1}) / (1 - r1 r0 t1 e^{i phi1})
  AsPrinted,           // (r1 - t1 e^{i phi1}) / (1 - r1 r0 t1 e^{i phi1})
};

enum class Topology {
  Coupled,       // both cavities open
  SingleCavity,  // C1 blocked: C2 alone, M1 acts as its back mirror
};

inline const char* to_string(ModelVariant v) {
  return v == ModelVariant::AsPrinted ? "as_printed" : "symmetric";
}

inline const char* to_string(Topology t) {
  return t == Topology::SingleCavity ? "single" : "coupled";
}

/// Mirror amplitude reflectivities, round-trip amplitude transmissions and
/// geometry of the two-cavity system. All amplitudes, not powers.
struct CoupledCavityConfig {
  double r0 = 1.0;  // end mirror M0
  double r1 = 1.0;  // middle mirror M1
  double r2 = 1.0;  // input mirror M2
  double t1 = 1.0;  // round-trip amplitude transmission of C1 (1 = lossless)
  double t2 = 1.0;  // round-trip amplitude transmission of C2
  double length1 = 0.0295;  // m
  double length2 = 0.0295;  // m
  double index1 = 1.0;
  double index2 = 1.0;
  ModelVariant variant = ModelVariant::SymmetricNumerator;
  Topology topology = Topology::Coupled;
  // Static mis-tuning of each cavity added to the scanned phase, radians.
  double phi1_offset = 0.0;
  double phi2_offset = 0.0;

  double fsr1() const { return kSpeedOfLight / (2.0 * length1 * index1); }
  double fsr2() const { return kSpeedOfLight / (2.0 * length2 * index2); }

  void validate() const {
    auto unit = [](const char* name, double v) {
      if (!(v >= 0.0 && v <= 1.0))
        throw InputError(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
    };
    auto transmission = [](const char* name, double v) {
      if (!(v > 0.0 && v <= 1.0))
        throw InputError(std::string(name) + " must lie in (0, 1], got " + std::to_string(v));
    };
    unit("r0", r0);
    unit("r1", r1);
    unit("r2", r2);
    transmission("t1", t1);
    transmission("t2", t2);
    if (!(length1 > 0.0 && std::isfinite(length1))) throw InputError("length1 must be positive");
    if (!(length2 > 0.0 && std::isfinite(length2))) throw InputError("length2 must be positive");
    if (!(index1 >= 1.0 && std::isfinite(index1))) throw InputError("index1 must be >= 1");
    if (!(index2 >= 1.0 && std::isfinite(index2))) throw InputError("index2 must be >= 1");
    if (!std::isfinite(phi1_offset) || !std::isfinite(phi2_offset))
      throw InputError("phase offsets must be finite");
  }

  bool operator==(const CoupledCavityConfig&) const = default;
};

/// Round-trip phases of C1 and C2, radians, unwrapped.
struct PhasePair {
  double phi1 = 0.0;
  double phi2 = 0.0;

  bool operator==(const PhasePair&) const = default;
};

/// Magnitude and principal-branch phase of a reflection coefficient.
struct PolarResponse {
  double rho = 0.0;
  double theta = 0.0;  // (-pi, pi]

  bool operator==(const PolarResponse&) const = default;
};

/// Phases measured from the co-resonant point: one FSR of detuning is 2 pi.
inline PhasePair round_trip_phase(const CoupledCavityConfig& config, double detuning_hz) {
  if (!std::isfinite(detuning_hz)) throw InputError("detuning must be finite");
  return {kTwoPi * detuning_hz / config.fsr1(), kTwoPi * detuning_hz / config.fsr2()};
}

namespace detail {

inline constexpr double kDegenerateDenominator = 1e-15;

inline ComplexAmplitude checked_ratio(ComplexAmplitude num, ComplexAmplitude den) {
  if (std::abs(den) < kDegenerateDenominator)
    throw DegenerateConfigurationError("reflection denominator vanishes (perfect mirrors on resonance)");
  return num / den;
}

}  // namespace detail

/// (r_in - r_back t e^{i phi}) / (1 - r_in r_back t e^{i phi})
inline ComplexAmplitude single_cavity_reflectivity(double r_in, double r_back, double t_rt, double phi) {
  const ComplexAmplitude loop = t_rt * std::polar(1.0, phi);
  return detail::checked_ratio(r_in - r_back * loop, 1.0 - r_in * r_back * loop);
}

/// Reflectivity of C1 seen from inside C2.
inline ComplexAmplitude inner_reflectivity(const CoupledCavityConfig& config, double phi1) {
  const ComplexAmplitude loop = config.t1 * std::polar(1.0, phi1);
  const ComplexAmplitude num = config.variant == ModelVariant::AsPrinted
                                   ? config.r1 - loop
                                   : config.r1 - config.r0 * loop;
  return detail::checked_ratio(num, 1.0 - config.r1 * config.r0 * loop);
}

/// Reflectivity of the compound system at the input mirror M2.
inline ComplexAmplitude coupled_reflectivity(const CoupledCavityConfig& config, PhasePair phases) {
  const ComplexAmplitude inner = inner_reflectivity(config, phases.phi1);
  const ComplexAmplitude loop = config.t2 * std::polar(1.0, phases.phi2);
  return detail::checked_ratio(config.r2 - inner * loop, 1.0 - config.r2 * inner * loop);
}

/// Response for the configured topology, with static phase offsets applied.
/// This is what the sweep and quantum layers evaluate.
inline ComplexAmplitude cavity_response(const CoupledCavityConfig& config, PhasePair phases) {
  const PhasePair shifted{phases.phi1 + config.phi1_offset, phases.phi2 + config.phi2_offset};
  if (config.topology == Topology::SingleCavity)
    return single_cavity_reflectivity(config.r2, config.r1, config.t2, shifted.phi2);
  return coupled_reflectivity(config, shifted);
}

inline PolarResponse to_polar(ComplexAmplitude z) {
  if (z == ComplexAmplitude{}) return {0.0, 0.0};
  double theta = std::arg(z);
  if (theta <= -kPi) theta = kPi;
  return {std::abs(z), theta};
}

}  // namespace crit
