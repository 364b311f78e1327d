#pragma once

// Least-squares parameter estimation with a bounded Nelder-Mead simplex.
// Each free parameter is searched in an unbounded coordinate z and mapped
// onto (lo, hi) by a logistic function, so estimates never leave the bounds.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crit/error.hpp"
#include "crit/io.hpp"
#include "crit/optics.hpp"
#include "crit/quantum.hpp"
#include "crit/sweep.hpp"

namespace crit {

enum class FitParameter { R1Sq, R2Sq, R0Sq, T1, T2, VarXIn, VarYIn, Eta, DetuningOffset, Scale };

inline const char* to_string(FitParameter p) {
  switch (p) {
    case FitParameter::R1Sq: return "r1_sq";
    case FitParameter::R2Sq: return "r2_sq";
    case FitParameter::R0Sq: return "r0_sq";
    case FitParameter::T1: return "t1";
    case FitParameter::T2: return "t2";
    case FitParameter::VarXIn: return "var_x_in";
    case FitParameter::VarYIn: return "var_y_in";
    case FitParameter::Eta: return "eta";
    case FitParameter::DetuningOffset: return "detuning_offset";
    case FitParameter::Scale: return "scale";
  }
  return "?";
}

inline std::optional<FitParameter> fit_parameter_from_string(std::string_view name) {
  for (auto p : {FitParameter::R1Sq, FitParameter::R2Sq, FitParameter::R0Sq, FitParameter::T1, FitParameter::T2,
                 FitParameter::VarXIn, FitParameter::VarYIn, FitParameter::Eta, FitParameter::DetuningOffset,
                 FitParameter::Scale})
    if (name == to_string(p)) return p;
  return std::nullopt;
}

enum class ObjectiveDomain { Linear, Decibel };

inline const char* to_string(ObjectiveDomain d) { return d == ObjectiveDomain::Linear ? "linear" : "db"; }

/// Everything the model needs besides the free parameters. Model detuning
/// is scale * (observed detuning - detuning_offset).
struct FitModel {
  CoupledCavityConfig config;
  InputGaussianState input;
  double omega_hz = 0.0;
  DetectionModel detection;
  double detuning_offset = 0.0;
  double scale = 1.0;
};

struct FreeParameter {
  FitParameter which = FitParameter::R1Sq;
  double lo = 0.0;
  double hi = 1.0;
};

struct FitProblem {
  ObservedSpectrum observed;
  FitModel model;
  std::vector<FreeParameter> free;
  ObjectiveDomain domain = ObjectiveDomain::Decibel;
};

struct FitEstimate {
  FitParameter which;
  double value;
};

struct FitResult {
  std::vector<FitEstimate> estimates;
  double residual = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::vector<double> history;  // best residual after each iteration
  FitModel model;               // model with the estimates applied
};

inline double get_parameter(const FitModel& m, FitParameter p) {
  switch (p) {
    case FitParameter::R1Sq: return m.config.r1 * m.config.r1;
    case FitParameter::R2Sq: return m.config.r2 * m.config.r2;
    case FitParameter::R0Sq: return m.config.r0 * m.config.r0;
    case FitParameter::T1: return m.config.t1;
    case FitParameter::T2: return m.config.t2;
    case FitParameter::VarXIn: return m.input.var_x;
    case FitParameter::VarYIn: return m.input.var_y;
    case FitParameter::Eta: return m.detection.eta;
    case FitParameter::DetuningOffset: return m.detuning_offset;
    case FitParameter::Scale: return m.scale;
  }
  return 0.0;
}

inline void set_parameter(FitModel& m, FitParameter p, double v) {
  switch (p) {
    case FitParameter::R1Sq: m.config.r1 = std::sqrt(v); break;
    case FitParameter::R2Sq: m.config.r2 = std::sqrt(v); break;
    case FitParameter::R0Sq: m.config.r0 = std::sqrt(v); break;
    case FitParameter::T1: m.config.t1 = v; break;
    case FitParameter::T2: m.config.t2 = v; break;
    case FitParameter::VarXIn: m.input.var_x = v; break;
    case FitParameter::VarYIn: m.input.var_y = v; break;
    case FitParameter::Eta: m.detection.eta = v; break;
    case FitParameter::DetuningOffset: m.detuning_offset = v; break;
    case FitParameter::Scale: m.scale = v; break;
  }
}

namespace detail {

inline void check_observed(const ObservedSpectrum& obs) {
  const std::size_t n = obs.detuning_hz.size();
  if (n == 0) throw InputError("observed spectrum is empty");
  if (obs.var_x.empty() && obs.var_y.empty() && obs.intensity.empty())
    throw InputError("observed spectrum has no var_x, var_y or intensity channel");
  for (const auto* ch : {&obs.var_x, &obs.var_y, &obs.intensity})
    if (!ch->empty() && ch->size() != n) throw InputError("observed channels differ in length");
  if (!std::is_sorted(obs.detuning_hz.begin(), obs.detuning_hz.end()))
    throw InputError("observed detuning grid is not sorted");
}

inline double to_domain(double v, ObjectiveDomain d) { return d == ObjectiveDomain::Decibel ? variance_to_db(v) : v; }

// Rounding can land on an endpoint for large |z|; keep strictly inside.
inline double logistic(double z, double lo, double hi) {
  const double x = lo + (hi - lo) / (1.0 + std::exp(-z));
  return std::clamp(x, std::nextafter(lo, hi), std::nextafter(hi, lo));
}

inline double logit(double v, double lo, double hi) { return std::log((v - lo) / (hi - v)); }

}  // namespace detail

/// RMS misfit over every channel present in the observation. Variances are
/// compared in the chosen domain; intensity is always compared linearly.
inline double residual(const FitModel& model, const FitProblem& problem) {
  const ObservedSpectrum& obs = problem.observed;
  detail::check_observed(obs);
  std::vector<double> grid(obs.detuning_hz.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = model.scale * (obs.detuning_hz[i] - model.detuning_offset);
  const auto records = evaluate_detunings(model.config, model.input, model.omega_hz, grid, model.detection);

  double sum = 0.0;
  std::size_t count = 0;
  auto add = [&](double a, double b) {
    const double d = a - b;
    sum += d * d;
    ++count;
  };
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!obs.var_x.empty())
      add(detail::to_domain(records[i].var_x, problem.domain), detail::to_domain(obs.var_x[i], problem.domain));
    if (!obs.var_y.empty())
      add(detail::to_domain(records[i].var_y, problem.domain), detail::to_domain(obs.var_y[i], problem.domain));
    if (!obs.intensity.empty()) add(records[i].intensity, obs.intensity[i]);
  }
  const double r = std::sqrt(sum / static_cast<double>(count));
  return std::isnan(r) ? std::numeric_limits<double>::infinity() : r;
}

inline double residual(std::span<const double> params, const FitProblem& problem) {
  if (params.size() != problem.free.size()) throw InputError("parameter count does not match free parameters");
  FitModel m = problem.model;
  for (std::size_t i = 0; i < params.size(); ++i) set_parameter(m, problem.free[i].which, params[i]);
  return residual(m, problem);
}

inline FitResult fit_parameters(const FitProblem& problem, std::span<const double> guess,
                                std::size_t max_evals = 10000) {
  const std::size_t n = problem.free.size();
  if (n == 0) throw InputError("no free parameters");
  if (guess.size() != n) throw InputError("initial guess size does not match free parameters");
  detail::check_observed(problem.observed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = problem.free[i];
    if (!(f.lo < f.hi) || !std::isfinite(f.lo) || !std::isfinite(f.hi))
      throw InputError(std::string("bounds for ") + to_string(f.which) + " are not ordered");
    if (!(guess[i] > f.lo && guess[i] < f.hi))
      throw InputError(std::string("initial ") + to_string(f.which) + " is not strictly inside its bounds");
  }

  auto to_params = [&](const std::vector<double>& z) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = detail::logistic(z[i], problem.free[i].lo, problem.free[i].hi);
    return p;
  };

  FitResult result;
  auto objective = [&](const std::vector<double>& z) {
    ++result.evaluations;
    try {
      return residual(to_params(z), problem);
    } catch (const DegenerateConfigurationError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  constexpr double kStep = 0.5;
  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) simplex[0][i] = detail::logit(guess[i], problem.free[i].lo, problem.free[i].hi);
  const std::vector<double> p0 = to_params(simplex[0]);
  for (std::size_t k = 1; k <= n; ++k) {
    simplex[k] = simplex[0];
    simplex[k][k - 1] += kStep;
    if (to_params(simplex[k])[k - 1] == p0[k - 1])
      throw DegenerateConfigurationError("initial simplex is degenerate: bounds too narrow to move " +
                                         std::string(to_string(problem.free[k - 1].which)));
  }
  std::vector<double> values(n + 1);
  for (std::size_t k = 0; k <= n; ++k) values[k] = objective(simplex[k]);

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s(n + 1);
    std::vector<double> v(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      s[k] = simplex[order[k]];
      v[k] = values[order[k]];
    }
    simplex = std::move(s);
    values = std::move(v);
  };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
      for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(simplex[k][i] - simplex[0][i]));
    return d;
  };
  auto z_scale = [&] {
    double m = 0.0;
    for (double z : simplex[0]) m = std::max(m, std::abs(z));
    return 1.0 + m;
  };
  auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = c[i] + t * (w[i] - c[i]);
    return r;
  };

  sort_simplex();
  while (true) {
    if (values[0] == 0.0 || diameter() <= 1e-10 * z_scale()) {
      result.converged = true;
      break;
    }
    if (result.evaluations >= max_evals) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k][i] / static_cast<double>(n);

    const auto reflected = point(centroid, simplex[n], -1.0);
    const double fr = objective(reflected);
    if (fr < values[0]) {
      const auto expanded = point(centroid, simplex[n], -2.0);
      const double fe = objective(expanded);
      if (fe < fr) {
        simplex[n] = expanded;
        values[n] = fe;
      } else {
        simplex[n] = reflected;
        values[n] = fr;
      }
    } else if (fr < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = fr;
    } else {
      const bool outside = fr < values[n];
      const auto contracted = point(centroid, outside ? reflected : simplex[n], 0.5);
      const double fc = objective(contracted);
      if (fc < (outside ? fr : values[n])) {
        simplex[n] = contracted;
        values[n] = fc;
      } else {
        for (std::size_t k = 1; k <= n; ++k) {
          simplex[k] = point(simplex[0], simplex[k], 0.5);
          values[k] = objective(simplex[k]);
        }
      }
    }
    sort_simplex();
    result.history.push_back(values[0]);
  }

  const std::vector<double> best = to_params(simplex[0]);
  result.residual = values[0];
  result.model = problem.model;
  for (std::size_t i = 0; i < n; ++i) {
    result.estimates.push_back({problem.free[i].which, best[i]});
    set_parameter(result.model, problem.free[i].which, best[i]);
  }
  return result;
}

}  // namespace crit
