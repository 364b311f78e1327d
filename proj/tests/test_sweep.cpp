#include <gtest/gtest.h>

#include <cmath>

#include "crit/presets.hpp"
#include "crit/sweep.hpp"

using namespace crit;

namespace {

SweepResult scan_preset(const std::string& name, std::size_t points = 401, unsigned threads = 1) {
  RunConfig cfg = preset(name);
  cfg.scan.points = points;
  return run_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.scan_spec(), cfg.detection_model(),
                  {threads});
}

bool identical(const SweepResult& a, const SweepResult& b) { return a.records == b.records; }

}  // namespace

TEST(Grid, SymmetricWithExactCentre) {
  const auto g = symmetric_grid(2.0, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.front(), -1.0);
  EXPECT_EQ(g[2], 0.0);
  EXPECT_EQ(g.back(), 1.0);
  const auto h = symmetric_grid(0.04, 2001);
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_EQ(h[i], -h[h.size() - 1 - i]);
}

TEST(FrequencyScan, ThreePointsAroundResonance) {
  RunConfig cfg = preset("figS2");
  const double fsr = cfg.cavity_config().fsr2();
  ScanSpec spec;
  spec.span = 0.02 * fsr;
  spec.points = 3;
  const auto r = frequency_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), spec);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_NEAR(r.records[0].detuning_fsr, -0.01, 1e-15);
  EXPECT_EQ(r.records[1].detuning_hz, 0.0);
  EXPECT_NEAR(r.records[2].detuning_fsr, 0.01, 1e-15);
  EXPECT_NEAR(r.records[2].phi2, 2 * std::numbers::pi * 0.01, 1e-14);
  for (const auto& rec : r.records) {
    const auto pair = sideband_pair(cfg.cavity_config(), rec.detuning_hz, cfg.omega_hz());
    EXPECT_EQ(rec.var_x, variance_x(pair, cfg.input_state()));
    EXPECT_EQ(rec.var_y, variance_y(pair, cfg.input_state()));
    EXPECT_EQ(rec.intensity, std::norm(coupled_reflectivity(cfg.cavity_config(), round_trip_phase(cfg.cavity_config(), rec.detuning_hz))));
  }
}

TEST(FrequencyScan, RejectsTooFewPoints) {
  ScanSpec spec;
  spec.points = 2;
  spec.span = 1e6;
  EXPECT_THROW(frequency_scan(CoupledCavityConfig{}, {}, 0.0, spec), InputError);
}

TEST(FrequencyScan, DeterministicAndThreadIndependent) {
  const auto a = scan_preset("figS2");
  const auto b = scan_preset("figS2");
  const auto c = scan_preset("figS2", 401, 4);
  EXPECT_TRUE(identical(a, b));
  EXPECT_TRUE(identical(a, c));
}

TEST(FrequencyScan, EvenInDetuning) {
  for (const char* name : {"figS2", "case1_coupled", "case2_single"}) {
    const auto r = scan_preset(name);
    const auto& rec = r.records;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const auto& a = rec[i];
      const auto& b = rec[rec.size() - 1 - i];
      EXPECT_NEAR(a.intensity, b.intensity, 1e-10);
      EXPECT_NEAR(a.var_x, b.var_x, 1e-10);
      EXPECT_NEAR(a.var_y, b.var_y, 1e-10);
      // The upper sideband at +d mirrors the lower one at -d.
      EXPECT_NEAR(a.rho_plus, b.rho_minus, 1e-10);
      EXPECT_NEAR(a.theta_plus, -b.theta_minus, 1e-10);
    }
  }
}

TEST(MirrorScan, ZeroSpanGivesIdenticalRecords) {
  RunConfig cfg = preset("figS2");
  ScanSpec spec;
  spec.mode = ScanMode::MirrorScan;
  spec.span = 0.0;
  spec.points = 5;
  const auto r = mirror_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), spec);
  for (const auto& rec : r.records) EXPECT_EQ(rec, r.records.front());
}

TEST(MirrorScan, DisplacementToPhase) {
  const double lambda = 1064e-9;
  const auto p = displacement_to_phase(2e-9, 1e-9, lambda);
  EXPECT_NEAR(p.phi1, 4 * std::numbers::pi / lambda * (1e-9 - 2e-9), 1e-15);
  EXPECT_NEAR(p.phi2, -4 * std::numbers::pi / lambda * 1e-9, 1e-15);
  // A quarter wave on M1 alone is a full 2 pi on cavity 2.
  EXPECT_NEAR(displacement_to_phase(0.0, lambda / 2, lambda).phi2, -2 * std::numbers::pi, 1e-12);
}

TEST(MirrorScan, GainRatioTwoEqualsFrequencyScan) {
  for (const char* name : {"figS2", "case1_coupled", "figS1_f"}) {
    RunConfig cfg = preset(name);
    cfg.scan.points = 301;
    const auto f = frequency_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.scan_spec());
    cfg.scan.mode = ScanMode::MirrorScan;
    const auto m = mirror_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.scan_spec());
    ASSERT_EQ(f.records.size(), m.records.size());
    for (std::size_t i = 0; i < f.records.size(); ++i) {
      const auto& a = f.records[i];
      const auto& b = m.records[i];
      EXPECT_NEAR(a.detuning_fsr, b.detuning_fsr, 1e-10);
      EXPECT_NEAR(a.phi1, b.phi1, 1e-10);
      EXPECT_NEAR(a.phi2, b.phi2, 1e-10);
      EXPECT_NEAR(a.intensity, b.intensity, 1e-10);
      EXPECT_NEAR(a.var_x, b.var_x, 1e-10);
      EXPECT_NEAR(a.var_y, b.var_y, 1e-10);
    }
  }
}

TEST(MirrorScan, OtherGainRatioBreaksEquivalence) {
  RunConfig cfg = preset("figS2");
  cfg.scan.points = 201;
  cfg.scan.mode = ScanMode::MirrorScan;
  const auto two = mirror_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.scan_spec());
  cfg.scan.gain_ratio = 1.0;
  const auto one = mirror_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.scan_spec());
  double diff = 0.0;
  for (std::size_t i = 0; i < one.records.size(); ++i)
    diff = std::max(diff, std::abs(one.records[i].intensity - two.records[i].intensity));
  EXPECT_GT(diff, 1e-3);
}

TEST(IntensityScan, CaseOneSingleCavityDip) {
  RunConfig cfg = preset("case1_single");
  const auto r = intensity_scan(cfg.cavity_config(), cfg.scan_spec());
  double lo = 1.0;
  for (const auto& rec : r.records) {
    lo = std::min(lo, rec.intensity);
    EXPECT_EQ(rec.var_x, 1.0);
  }
  const double amp = (std::sqrt(0.968) - std::sqrt(0.998)) / (1 - std::sqrt(0.968 * 0.998));
  EXPECT_NEAR(lo, amp * amp, 1e-12);
  EXPECT_NEAR(lo, 0.781, 1e-3);
}

TEST(IntensityScan, CaseTwoNearCriticalDip) {
  RunConfig cfg = preset("case2_single");
  const auto r = intensity_scan(cfg.cavity_config(), cfg.scan_spec());
  double lo = 1.0;
  for (const auto& rec : r.records) lo = std::min(lo, rec.intensity);
  EXPECT_NEAR(lo, 2.4e-4, 0.2e-4);
}

TEST(IntensityScan, CoupledHasCentralMaximum) {
  RunConfig cfg = preset("figS1_d");
  const auto r = intensity_scan(cfg.cavity_config(), cfg.scan_spec());
  const std::size_t mid = r.records.size() / 2;
  EXPECT_GT(r.records[mid].intensity, r.records[mid - 20].intensity);
  EXPECT_GT(r.records[mid].intensity, r.records[mid + 20].intensity);
}

TEST(Detection, AppliedToRecordedVariances) {
  RunConfig cfg = preset("figS2");
  cfg.scan.points = 11;
  const auto ideal = run_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.scan_spec());
  const DetectionModel det{0.8836, std::numbers::pi / 2};
  const auto lossy = run_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.scan_spec(), det);
  for (std::size_t i = 0; i < ideal.records.size(); ++i) {
    EXPECT_NEAR(lossy.records[i].var_x, 0.8836 * ideal.records[i].var_x + 0.1164, 1e-12);
    EXPECT_NEAR(lossy.records[i].var_lo, lossy.records[i].var_y, 1e-12);
  }
}
