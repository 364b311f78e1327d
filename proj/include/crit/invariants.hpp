#pragma once

// Self-checks of the analytic identities the model must satisfy. Used by the
// `validate` subcommand; the unit tests cover the same ground more densely.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "crit/config.hpp"
#include "crit/format.hpp"
#include "crit/optics.hpp"
#include "crit/presets.hpp"
#include "crit/quantum.hpp"
#include "crit/sweep.hpp"

namespace crit {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // largest deviation seen
  double tolerance = 0.0;
};

namespace detail {

inline CoupledCavityConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> refl(0.5, 0.99999);
  std::uniform_real_distribution<double> trans(0.9, 1.0);
  CoupledCavityConfig c;
  c.r0 = std::sqrt(refl(rng));
  c.r1 = std::sqrt(refl(rng));
  c.r2 = std::sqrt(refl(rng));
  c.t1 = trans(rng);
  c.t2 = trans(rng);
  return c;
}

inline InputGaussianState random_input(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> s(-1.5, 1.5);
  std::uniform_real_distribution<double> excess(1.0, 3.0);
  const InputGaussianState pure = input_from_squeeze_factor(s(rng));
  return {pure.var_x * excess(rng), pure.var_y * excess(rng)};
}

}  // namespace detail

inline std::vector<CheckResult> run_invariant_checks(std::uint64_t seed = 20131) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CheckResult> out;

  auto record = [&](std::string name, double worst, double tol, bool lower_bound = false) {
    const bool ok = lower_bound ? worst >= tol : worst <= tol;
    out.push_back({std::move(name), ok && std::isfinite(worst), worst, tol});
  };

  {
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const auto c = detail::random_config(rng);
      for (int j = 0; j < 50; ++j) {
        const PhasePair p{phase(rng), phase(rng)};
        worst = std::max(worst, std::abs(inner_reflectivity(c, p.phi1)) - 1.0);
        worst = std::max(worst, std::abs(coupled_reflectivity(c, p)) - 1.0);
      }
    }
    record("passivity |R| <= 1", std::max(worst, 0.0), 1e-12);
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      auto c = detail::random_config(rng);
      c.r0 = 1.0;
      c.t1 = 1.0;
      worst = std::max(worst, std::abs(std::abs(inner_reflectivity(c, phase(rng))) - 1.0));
    }
    record("lossless back cavity is all-pass", worst, 1e-12);
  }
  {
    double sym = 0.0, per = 0.0;
    for (int k = 0; k < 200; ++k) {
      const auto c = detail::random_config(rng);
      const PhasePair p{phase(rng), phase(rng)};
      const auto r = coupled_reflectivity(c, p);
      sym = std::max(sym, std::abs(coupled_reflectivity(c, {-p.phi1, -p.phi2}) - std::conj(r)));
      per = std::max(per, std::abs(coupled_reflectivity(c, {p.phi1 + kTwoPi, p.phi2 + kTwoPi}) - r));
    }
    record("conjugate symmetry", sym, 1e-12);
    record("2pi periodicity", per, 1e-12);
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      auto c = detail::random_config(rng);
      c.r1 = 1.0;
      const double phi2 = phase(rng);
      const auto ref = coupled_reflectivity(c, {0.0, phi2});
      auto other = detail::random_config(rng);
      c.r0 = other.r0;
      c.t1 = other.t1;
      worst = std::max(worst, std::abs(coupled_reflectivity(c, {phase(rng), phi2}) - ref));
    }
    record("decoupling at r1 = 1", worst, 1e-12);
  }

  std::uniform_real_distribution<double> omega_frac(0.0, 0.01);
  std::uniform_real_distribution<double> detuning_frac(-0.5, 0.5);
  {
    double vac = 0.0, angle = 0.0, bs = 0.0, mirror = 0.0;
    double product = 2.0;
    for (int k = 0; k < 2000; ++k) {
      const auto c = detail::random_config(rng);
      const auto in = detail::random_input(rng);
      const double omega = omega_frac(rng) * c.fsr2();
      const double det = detuning_frac(rng) * c.fsr2();
      const auto pair = sideband_pair(c, det, omega);
      vac = std::max({vac, std::abs(variance_x(pair, InputGaussianState::vacuum()) - 1.0),
                      std::abs(variance_y(pair, InputGaussianState::vacuum()) - 1.0)});
      const double vx = variance_x(pair, in), vy = variance_y(pair, in);
      angle = std::max({angle, std::abs(variance_at_angle(pair, in, 0.0) - vx),
                        std::abs(variance_at_angle(pair, in, kPi / 2) - vy)});
      product = std::min(product, vx * vy);
      const auto mirrored = sideband_pair(c, -det, omega);
      mirror = std::max({mirror, std::abs(variance_x(mirrored, in) - vx), std::abs(variance_y(mirrored, in) - vy)});

      const double rho = std::sqrt(unit(rng));
      const SidebandResponsePair flat{{rho, 0.0}, {rho, 0.0}, 0.0, 0.0};
      bs = std::max({bs, std::abs(variance_x(flat, in) - (rho * rho * in.var_x + 1.0 - rho * rho)),
                     std::abs(variance_y(flat, in) - (rho * rho * in.var_y + 1.0 - rho * rho))});
    }
    record("vacuum preservation", vac, 1e-12);
    record("angle consistency", angle, 1e-12);
    record("beam-splitter reduction", bs, 1e-12);
    record("detuning mirror symmetry", mirror, 1e-10);
    record("uncertainty product >= 1 - 1e-9", product, 1.0 - 1e-9, true);
  }
  {
    RunConfig cfg = preset("figS2");
    cfg.scan.points = 201;
    const auto f = frequency_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.scan_spec());
    cfg.scan.mode = ScanMode::MirrorScan;
    const auto m = mirror_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.scan_spec());
    double worst = 0.0;
    for (std::size_t i = 0; i < f.records.size(); ++i) {
      const auto& a = f.records[i];
      const auto& b = m.records[i];
      worst = std::max({worst, std::abs(a.detuning_fsr - b.detuning_fsr), std::abs(a.var_x - b.var_x),
                        std::abs(a.var_y - b.var_y), std::abs(a.intensity - b.intensity)});
    }
    record("mirror scan equals frequency scan", worst, 1e-10);
  }
  {
    double failures = 0.0;
    for (const auto& name : preset_names()) {
      try {
        preset(name).validate();
      } catch (const Error&) {
        failures += 1.0;
      }
    }
    record("presets validate", failures, 0.0);
  }
  return out;
}

}  // namespace crit
