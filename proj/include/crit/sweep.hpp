#pragma once

// Detuning grids and the scan engine. Two ways to move across the resonance:
// tune the laser (FrequencyScan) or displace M1 and M0 with a fixed laser
// (MirrorScan). With M0 driven at twice the M1 displacement the two agree.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "crit/error.hpp"
#include "crit/optics.hpp"
#include "crit/quantum.hpp"

namespace crit {

enum class ScanMode { FrequencyScan, MirrorScan };

inline const char* to_string(ScanMode m) { return m == ScanMode::MirrorScan ? "mirror" : "frequency"; }

struct ScanSpec {
  ScanMode mode = ScanMode::FrequencyScan;
  double span = 0.0;          // Hz (FrequencyScan) or M1 displacement in m (MirrorScan)
  std::size_t points = 2001;  // >= 3
  double gain_ratio = 2.0;    // M0 displacement / M1 displacement
  double wavelength = 1064e-9;

  void validate() const {
    if (points < 3) throw InputError("scan needs at least 3 points");
    if (!(span >= 0.0 && std::isfinite(span))) throw InputError("scan span must be finite and >= 0");
    if (mode == ScanMode::MirrorScan) {
      if (!(wavelength > 0.0 && std::isfinite(wavelength))) throw InputError("wavelength must be positive");
      if (!std::isfinite(gain_ratio)) throw InputError("gain ratio must be finite");
    }
  }

  bool operator==(const ScanSpec&) const = default;
};

struct SweepRecord {
  double detuning_hz = 0.0;
  double detuning_fsr = 0.0;  // in units of the input cavity's FSR
  double phi1 = 0.0;
  double phi2 = 0.0;
  double rho_plus = 0.0;
  double theta_plus = 0.0;
  double rho_minus = 0.0;
  double theta_minus = 0.0;
  double intensity = 0.0;  // |R|^2 at the carrier
  double var_x = 1.0;
  double var_y = 1.0;
  double var_lo = 1.0;  // variance at the detection LO phase

  bool operator==(const SweepRecord&) const = default;
};

struct SweepResult {
  std::vector<SweepRecord> records;  // ascending detuning
  CoupledCavityConfig config;
  InputGaussianState input;
  DetectionModel detection;
  ScanSpec scan;
  double omega_hz = 0.0;
};

struct SweepOptions {
  unsigned threads = 1;
};

/// Uniform grid over [-span/2, span/2]; exactly symmetric, contains 0 when
/// `points` is odd.
inline std::vector<double> symmetric_grid(double span, std::size_t points) {
  std::vector<double> grid(points);
  const double centre = static_cast<double>(points - 1) / 2.0;
  const double denom = static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) {
    const double offset = static_cast<double>(k) - centre;
    grid[k] = offset == 0.0 ? 0.0 : span * offset / denom;
  }
  return grid;
}

/// Displacements along the M0 -> M2 axis to round-trip phase increments.
/// Moving M1 forward lengthens C1 and shortens C2; moving M0 forward
/// shortens C1.
inline PhasePair displacement_to_phase(double d0, double d1, double wavelength, double index1 = 1.0,
                                       double index2 = 1.0) {
  if (!(wavelength > 0.0)) throw InputError("wavelength must be positive");
  const double k = 4.0 * kPi / wavelength;
  return {k * (d1 - d0) * index1, -k * d1 * index2};
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();  // joins
  if (failure) std::rethrow_exception(failure);
}

inline SweepRecord evaluate_point(const CoupledCavityConfig& config, const InputGaussianState& input,
                                  double omega_hz, const DetectionModel& detection, PhasePair carrier,
                                  double detuning_hz) {
  const SidebandResponsePair pair = sideband_pair_at(config, carrier, omega_hz, detuning_hz);
  SweepRecord rec;
  rec.detuning_hz = detuning_hz;
  rec.detuning_fsr = detuning_hz / config.fsr2();
  rec.phi1 = carrier.phi1;
  rec.phi2 = carrier.phi2;
  rec.rho_plus = pair.plus.rho;
  rec.theta_plus = pair.plus.theta;
  rec.rho_minus = pair.minus.rho;
  rec.theta_minus = pair.minus.theta;
  rec.intensity = std::norm(cavity_response(config, carrier));
  rec.var_x = apply_detection(variance_x(pair, input), detection);
  rec.var_y = apply_detection(variance_y(pair, input), detection);
  rec.var_lo = apply_detection(variance_at_angle(pair, input, detection.lo_phase), detection);
  return rec;
}

}  // namespace detail

/// Co-scanned records at arbitrary laser detunings (Hz); order preserved.
inline std::vector<SweepRecord> evaluate_detunings(const CoupledCavityConfig& config,
                                                   const InputGaussianState& input, double omega_hz,
                                                   std::span<const double> detunings,
                                                   const DetectionModel& detection = {},
                                                   const SweepOptions& options = {}) {
  std::vector<SweepRecord> records(detunings.size());
  detail::parallel_for(detunings.size(), options.threads, [&](std::size_t i) {
    records[i] = detail::evaluate_point(config, input, omega_hz, detection,
                                        round_trip_phase(config, detunings[i]), detunings[i]);
  });
  return records;
}

inline SweepResult frequency_scan(const CoupledCavityConfig& config, const InputGaussianState& input,
                                  double omega_hz, const ScanSpec& spec, const DetectionModel& detection = {},
                                  const SweepOptions& options = {}) {
  if (spec.mode != ScanMode::FrequencyScan) throw InputError("frequency_scan needs a FrequencyScan spec");
  spec.validate();
  config.validate();
  detection.validate();
  const std::vector<double> grid = symmetric_grid(spec.span, spec.points);
  return {evaluate_detunings(config, input, omega_hz, grid, detection, options), config, input, detection,
          spec, omega_hz};
}

/// Fixed laser, M1 swept over the displacement grid with M0 moved by
/// gain_ratio times as much. Each record carries the laser detuning that
/// produces the same C2 phase.
inline SweepResult mirror_scan(const CoupledCavityConfig& config, const InputGaussianState& input,
                               double omega_hz, const ScanSpec& spec, const DetectionModel& detection = {},
                               const SweepOptions& options = {}) {
  if (spec.mode != ScanMode::MirrorScan) throw InputError("mirror_scan needs a MirrorScan spec");
  spec.validate();
  config.validate();
  detection.validate();
  const std::vector<double> grid = symmetric_grid(spec.span, spec.points);
  const std::size_t n = grid.size();
  std::vector<SweepRecord> records(n);
  detail::parallel_for(n, options.threads, [&](std::size_t i) {
    // Equivalent detuning is proportional to -d1: walk the grid backwards.
    const double d1 = grid[n - 1 - i];
    const PhasePair phases =
        displacement_to_phase(spec.gain_ratio * d1, d1, spec.wavelength, config.index1, config.index2);
    const double detuning = phases.phi2 * config.fsr2() / kTwoPi;
    records[i] = detail::evaluate_point(config, input, omega_hz, detection, phases, detuning);
  });
  return {std::move(records), config, input, detection, spec, omega_hz};
}

inline SweepResult run_scan(const CoupledCavityConfig& config, const InputGaussianState& input, double omega_hz,
                            const ScanSpec& spec, const DetectionModel& detection = {},
                            const SweepOptions& options = {}) {
  return spec.mode == ScanMode::MirrorScan ? mirror_scan(config, input, omega_hz, spec, detection, options)
                                           : frequency_scan(config, input, omega_hz, spec, detection, options);
}

/// Classical carrier reflection only; quadrature columns hold the vacuum
/// value and both sidebands equal the carrier.
inline SweepResult intensity_scan(const CoupledCavityConfig& config, const ScanSpec& spec,
                                  const SweepOptions& options = {}) {
  SweepResult result = run_scan(config, InputGaussianState::vacuum(), 0.0, spec, {}, options);
  for (auto& rec : result.records) rec.var_x = rec.var_y = rec.var_lo = 1.0;
  return result;
}

}  // namespace crit
