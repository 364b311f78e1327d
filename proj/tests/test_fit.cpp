#include <gtest/gtest.h>

#include <cmath>

#include "crit/fit.hpp"
#include "crit/presets.hpp"

using namespace crit;

namespace {

FitModel model_of(const RunConfig& cfg) {
  return {cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.detection_model(), 0.0, 1.0};
}

ObservedSpectrum synthetic(const RunConfig& cfg, std::size_t points = 401) {
  RunConfig c = cfg;
  c.scan.points = points;
  return observed_from_result(
      run_scan(c.cavity_config(), c.input_state(), c.omega_hz(), c.scan_spec(), c.detection_model()));
}

FitProblem problem_for(const RunConfig& cfg, std::vector<FreeParameter> free, std::size_t points = 401) {
  FitProblem p;
  p.observed = synthetic(cfg, points);
  p.model = model_of(cfg);
  p.free = std::move(free);
  return p;
}

double estimate(const FitResult& r, FitParameter which) {
  for (const auto& e : r.estimates)
    if (e.which == which) return e.value;
  ADD_FAILURE() << "no estimate for " << to_string(which);
  return NAN;
}

}  // namespace

TEST(Residual, ZeroAtGeneratingParameters) {
  const RunConfig cfg = preset("figS2");
  const FitProblem p = problem_for(cfg, {{FitParameter::R1Sq, 0.99, 0.9999}});
  EXPECT_NEAR(residual(p.model, p), 0.0, 1e-12);
  const double at_truth[] = {0.999};
  EXPECT_NEAR(residual(std::span<const double>(at_truth), p), 0.0, 1e-12);
}

TEST(Residual, ConstantOffsetInLinearDomain) {
  FitProblem p = problem_for(preset("figS2"), {{FitParameter::R1Sq, 0.99, 0.9999}});
  p.domain = ObjectiveDomain::Linear;
  p.observed.intensity.clear();
  for (auto& v : p.observed.var_x) v += 0.1;
  for (auto& v : p.observed.var_y) v += 0.1;
  EXPECT_NEAR(residual(p.model, p), 0.1, 1e-12);
}

TEST(Residual, DetectsSmallReflectivityChange) {
  const RunConfig truth = preset("figS1_d");
  RunConfig shifted = truth;
  shifted.cavity.r1_sq += 0.0005;
  FitProblem p = problem_for(truth, {{FitParameter::R1Sq, 0.99, 0.9999}});
  // Independent check: the two intensity sweeps really differ.
  const auto a = synthetic(truth), b = synthetic(shifted);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.intensity.size(); ++i) diff = std::max(diff, std::abs(a.intensity[i] - b.intensity[i]));
  ASSERT_GT(diff, 1e-3);
  EXPECT_GT(residual(model_of(shifted), p), 0.0);
}

TEST(Residual, RejectsBadObservations) {
  FitProblem p = problem_for(preset("figS2"), {{FitParameter::R1Sq, 0.99, 0.9999}});
  std::swap(p.observed.detuning_hz.front(), p.observed.detuning_hz.back());
  EXPECT_THROW(residual(p.model, p), InputError);
  FitProblem q = problem_for(preset("figS2"), {{FitParameter::R1Sq, 0.99, 0.9999}});
  q.observed.var_x.pop_back();
  EXPECT_THROW(residual(q.model, q), InputError);
}

TEST(Fit, RecoversMiddleMirrorReflectivity) {
  FitProblem p = problem_for(preset("figS1_d"), {{FitParameter::R1Sq, 0.99, 0.9999}});
  const double guess[] = {0.995};
  const FitResult r = fit_parameters(p, guess);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(estimate(r, FitParameter::R1Sq), 0.999, 1e-5);
}

TEST(Fit, RecoversMeasuredInputState) {
  const RunConfig cfg = preset("case1_coupled");
  ASSERT_NEAR(cfg.input_state().var_x, 0.69183, 1e-5);
  FitProblem p = problem_for(cfg, {{FitParameter::VarXIn, 0.1, 1.5}, {FitParameter::VarYIn, 0.5, 6.0}});
  const double guess[] = {1.0, 1.0};
  const FitResult r = fit_parameters(p, guess);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(estimate(r, FitParameter::VarXIn), cfg.input_state().var_x, 1e-4);
  EXPECT_NEAR(estimate(r, FitParameter::VarYIn), cfg.input_state().var_y, 1e-4);
}

TEST(Fit, AlreadyOptimalConvergesWithoutImprovement) {
  FitProblem p = problem_for(preset("figS2"), {{FitParameter::Eta, 0.5, 1.5}});
  const double guess[] = {1.0};
  const FitResult r = fit_parameters(p, guess);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(estimate(r, FitParameter::Eta), 1.0, 1e-9);
  EXPECT_LE(r.residual, 1e-12);
  for (double h : r.history) EXPECT_LE(h, 1e-12);
}

TEST(Fit, HistoryIsMonotoneAndDeterministic) {
  FitProblem p = problem_for(preset("case2_coupled"),
                             {{FitParameter::R1Sq, 0.95, 0.98}, {FitParameter::R2Sq, 0.95, 0.99}});
  const double guess[] = {0.96, 0.975};
  const FitResult a = fit_parameters(p, guess);
  const FitResult b = fit_parameters(p, guess);
  ASSERT_FALSE(a.history.empty());
  for (std::size_t i = 1; i < a.history.size(); ++i) EXPECT_LE(a.history[i], a.history[i - 1]);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.evaluations, b.evaluations);
  EXPECT_EQ(a.residual, b.residual);
  for (std::size_t i = 0; i < a.estimates.size(); ++i) EXPECT_EQ(a.estimates[i].value, b.estimates[i].value);
}

TEST(Fit, EstimatesStayInsideBounds) {
  // The truth (0.999) lies outside the bounds; the search must press against
  // the upper bound without crossing it.
  FitProblem p = problem_for(preset("figS1_d"), {{FitParameter::R1Sq, 0.99, 0.998}});
  const double guess[] = {0.995};
  const FitResult r = fit_parameters(p, guess, 2000);
  const double v = estimate(r, FitParameter::R1Sq);
  EXPECT_GT(v, 0.99);
  EXPECT_LT(v, 0.998);
  EXPECT_GE(r.residual, 0.0);
}

TEST(Fit, RespectsEvaluationBudget) {
  FitProblem p = problem_for(preset("figS1_d"), {{FitParameter::R1Sq, 0.99, 0.9999}});
  const double guess[] = {0.995};
  const FitResult r = fit_parameters(p, guess, 10);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.evaluations, 12u);
}

TEST(Fit, RecoversDetuningOffsetAndScale) {
  const RunConfig cfg = preset("figS2");
  FitProblem p = problem_for(cfg, {{FitParameter::DetuningOffset, -5e6, 5e6}, {FitParameter::Scale, 0.5, 2.0}});
  const double guess[] = {1e6, 1.1};
  const FitResult r = fit_parameters(p, guess);
  EXPECT_NEAR(estimate(r, FitParameter::DetuningOffset), 0.0, 1e-6 * cfg.cavity_config().fsr2());
  EXPECT_NEAR(estimate(r, FitParameter::Scale), 1.0, 1e-4);
}

TEST(Fit, ErrorCases) {
  FitProblem p = problem_for(preset("figS2"), {});
  EXPECT_THROW(fit_parameters(p, std::vector<double>{}), InputError);
  p.free = {{FitParameter::R1Sq, 0.9999, 0.99}};
  EXPECT_THROW(fit_parameters(p, std::vector<double>{0.995}), InputError);
  p.free = {{FitParameter::R1Sq, 0.99, 0.9999}};
  EXPECT_THROW(fit_parameters(p, std::vector<double>{0.99}), InputError);
  EXPECT_THROW(fit_parameters(p, std::vector<double>{0.995, 1.0}), InputError);
  p.free = {{FitParameter::R1Sq, 0.999, std::nextafter(0.999, 1.0)}};
  EXPECT_THROW(fit_parameters(p, std::vector<double>{0.5 * (0.999 + std::nextafter(0.999, 1.0))}), Error);
}

TEST(Fit, ParameterNames) {
  EXPECT_EQ(fit_parameter_from_string("r1_sq"), FitParameter::R1Sq);
  EXPECT_EQ(fit_parameter_from_string("detuning_offset"), FitParameter::DetuningOffset);
  EXPECT_FALSE(fit_parameter_from_string("r9_sq"));
}

// Every preset, one free parameter at a time, starting a little off the truth.
TEST(Fit, SingleParameterRecoveryAcrossPresets) {
  for (const auto& name : preset_names()) {
    const RunConfig cfg = preset(name);
    const FitModel truth = model_of(cfg);
    for (FitParameter which : {FitParameter::R1Sq, FitParameter::R2Sq, FitParameter::VarXIn}) {
      const double t = get_parameter(truth, which);
      double lo, hi, guess;
      if (which == FitParameter::VarXIn) {
        lo = 0.5 * t;
        hi = 2.0 * t;
        guess = 1.05 * t;
      } else {
        lo = t - 0.3 * (1 - t);
        hi = t + 0.3 * (1 - t);
        guess = t + 0.1 * (1 - t);
      }
      // Observed on the preset grid so the narrow split modes are resolved.
      FitProblem p = problem_for(cfg, {{which, lo, hi}}, cfg.scan.points);
      const FitResult r = fit_parameters(p, std::vector<double>{guess});
      EXPECT_NEAR(estimate(r, which), t, 1e-4 * std::abs(t)) << name << " " << to_string(which);
    }
  }
}
