#include <gtest/gtest.h>

#include <cmath>

#include "crit/config.hpp"
#include "crit/presets.hpp"

using namespace crit;

namespace {

const char* kMinimal = R"(
[cavity]
r1_sq = 0.999
r2_sq = 0.958
)";

template <typename Fn>
ConfigError config_error(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected ConfigError";
  return ConfigError("", "");
}

}  // namespace

TEST(LoadConfig, MinimalDocumentUsesDefaults) {
  const RunConfig cfg = load_config(kMinimal);
  EXPECT_EQ(cfg.cavity.variant, ModelVariant::SymmetricNumerator);
  EXPECT_EQ(cfg.cavity.topology, Topology::Coupled);
  EXPECT_EQ(cfg.detection_model().eta, 1.0);
  EXPECT_EQ(cfg.detection_model().lo_phase, 0.0);
  EXPECT_EQ(cfg.input_state(), InputGaussianState::vacuum());
  EXPECT_EQ(cfg.cavity_config().t1, 1.0);
  EXPECT_EQ(cfg.scan.points, 2001u);
}

TEST(LoadConfig, PowerToAmplitude) {
  const RunConfig cfg = load_config("[cavity]\nr1_sq = 0.967\nr2_sq = 0.968\nloss1 = 0.01\n");
  const auto c = cfg.cavity_config();
  EXPECT_NEAR(c.r1, 0.98336, 1e-5);
  EXPECT_NEAR(c.r2, 0.98387, 1e-5);
  EXPECT_EQ(c.r1, std::sqrt(0.967));
  EXPECT_EQ(c.t1, std::sqrt(0.99));
}

TEST(LoadConfig, RangeErrorNamesField) {
  const auto e = config_error([] { load_config("[cavity]\nr1_sq = 1.2\nr2_sq = 0.9\n"); });
  EXPECT_EQ(e.field(), "r1_sq");
  EXPECT_NE(std::string(e.what()).find("r1_sq"), std::string::npos);
}

TEST(LoadConfig, SyntaxErrorCarriesLineNumber) {
  const auto e = config_error([] { load_config("[cavity]\nr1_sq = 0.9\nthis is not valid\n"); });
  EXPECT_EQ(e.line(), 3);
  EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
}

TEST(LoadConfig, UnknownKeyRejected) {
  const auto e = config_error([] { load_config("[cavity]\nr1_sq = 0.9\nr2_sq = 0.9\nr3_sq = 0.5\n"); });
  EXPECT_EQ(e.line(), 4);
  EXPECT_NE(std::string(e.what()).find("unknown key"), std::string::npos);
  config_error([] { load_config("[bogus]\nx = 1\n"); });
}

TEST(LoadConfig, DuplicateKeyRejected) {
  config_error([] { load_config("[cavity]\nr1_sq = 0.9\nr1_sq = 0.8\nr2_sq = 0.9\n"); });
}

TEST(LoadConfig, MissingRequiredKey) {
  const auto e = config_error([] { load_config("[cavity]\nr1_sq = 0.9\n"); });
  EXPECT_EQ(e.field(), "r2_sq");
}

TEST(LoadConfig, ExactlyOneInputStyle) {
  config_error([] { load_config(std::string(kMinimal) + "[input]\ns = 0.5\nvar_x = 0.5\nvar_y = 2\n"); });
  config_error([] { load_config(std::string(kMinimal) + "[input]\nsqueeze_db = 1.6\n"); });
  const auto db = load_config(std::string(kMinimal) + "[input]\nsqueeze_db = 1.6\nantisqueeze_db = 4\n");
  EXPECT_NEAR(db.input_state().var_x, 0.69183, 1e-5);
  const auto direct = load_config(std::string(kMinimal) + "[input]\nvar_x = 0.5\nvar_y = 2\n");
  EXPECT_EQ(direct.input_state().var_y, 2.0);
  config_error([] { load_config(std::string(kMinimal) + "[input]\nvar_x = 0.5\nvar_y = 1.5\n"); });
}

TEST(LoadConfig, ExactlyOneSidebandStyle) {
  config_error(
      [] { load_config(std::string(kMinimal) + "[sideband]\nomega_hz = 1e6\nomega_fsr_fraction = 0.001\n"); });
  const auto cfg = load_config(std::string(kMinimal) + "[sideband]\nomega_fsr_fraction = 0.0005\n");
  EXPECT_NEAR(cfg.omega_hz(), 0.0005 * 299792458.0 / (2 * 0.0295), 1e-6);
}

TEST(LoadConfig, DetectionFromVisibility) {
  const auto cfg = load_config(std::string(kMinimal) + "[detection]\nvisibility = 0.94\nlo_phase = 1.5\n");
  EXPECT_NEAR(cfg.detection_model().eta, 0.8836, 1e-12);
  EXPECT_EQ(cfg.detection_model().lo_phase, 1.5);
  config_error([] { load_config(std::string(kMinimal) + "[detection]\neta = 0\n"); });
}

TEST(LoadConfig, ScanSpanUnits) {
  const auto freq = load_config(std::string(kMinimal) + "[scan]\nspan_fsr = 0.1\npoints = 11\n");
  EXPECT_NEAR(freq.scan_spec().span, 0.1 * freq.cavity_config().fsr2(), 1e-3);
  EXPECT_EQ(freq.scan_spec().points, 11u);
  const auto mirror = load_config(std::string(kMinimal) + "[scan]\nmode = mirror\nspan_fsr = 1\n");
  EXPECT_NEAR(mirror.scan_spec().span, 1064e-9 / 2, 1e-18);
  const auto native = load_config(std::string(kMinimal) + "[scan]\nspan = 5e7\n");
  EXPECT_EQ(native.scan_spec().span, 5e7);
  config_error([] { load_config(std::string(kMinimal) + "[scan]\npoints = 2\n"); });
  config_error([] { load_config(std::string(kMinimal) + "[scan]\npoints = 10.5\n"); });
  config_error([] { load_config(std::string(kMinimal) + "[scan]\nmode = sideways\n"); });
}

TEST(LoadConfig, CommentsAndWhitespace) {
  const auto cfg = load_config("# header\n\n[cavity]  \n  r1_sq=0.99   ; trailing\nr2_sq = 0.9\r\n");
  EXPECT_EQ(cfg.cavity.r1_sq, 0.99);
}

TEST(LoadConfig, JsonEquivalent) {
  const auto ini = load_config(std::string(kMinimal) + "[input]\ns = 0.5\n[cavity]\n");
  const auto json = load_config(R"({"cavity": {"r1_sq": 0.999, "r2_sq": 0.958}, "input": {"s": 0.5}})");
  EXPECT_EQ(ini, json);
  config_error([] { load_config(R"({"cavity": {"r1_sq": 0.999, "r2_sq": 0.958, "bogus": 1}})"); });
  config_error([] { load_config(R"({"cavity": )"); });
}

TEST(LoadConfig, OverlayOnPresetReplacesStyleGroups) {
  const RunConfig base = preset("case1_coupled");
  const RunConfig cfg = load_config("[input]\ns = 0.3\n[cavity]\nr0_sq = 0.99\n", base);
  EXPECT_EQ(cfg.cavity.r1_sq, 0.998);
  EXPECT_EQ(cfg.cavity.r0_sq, 0.99);
  EXPECT_TRUE(std::holds_alternative<SqueezeFactor>(cfg.input));
  EXPECT_TRUE(std::holds_alternative<OmegaHz>(cfg.sideband));
}

TEST(SerializeConfig, RoundTripsEveryPreset) {
  for (const auto& name : preset_names()) {
    const RunConfig cfg = preset(name);
    EXPECT_EQ(load_config(serialize_config(cfg)), cfg) << name;
  }
}

TEST(SerializeConfig, RoundTripsAllStyles) {
  RunConfig cfg = preset("figS2");
  cfg.cavity.variant = ModelVariant::AsPrinted;
  cfg.cavity.topology = Topology::SingleCavity;
  cfg.cavity.loss1 = 0.0123456789;
  cfg.cavity.phi2_offset = -0.1;
  cfg.input = DirectVariances{0.7, 1.9};
  cfg.sideband = OmegaHz{2.5e6};
  cfg.detection = {Visibility{0.94}, 0.3};
  cfg.scan = {ScanMode::MirrorScan, SpanNative{1e-7}, 17, 2.0, 1550e-9};
  cfg.output = {"out.json", OutputFormat::Json};
  const std::string text = serialize_config(cfg);
  EXPECT_EQ(load_config(text), cfg);
  EXPECT_EQ(serialize_config(load_config(text)), text);
}

TEST(Presets, MirrorValues) {
  EXPECT_EQ(std::get<SqueezeFactor>(preset("figS2").input).s, 0.5);
  EXPECT_EQ(preset("case1_coupled").cavity.r1_sq, 0.998);
  EXPECT_EQ(preset("case2_coupled").cavity.r1_sq, 0.967);
  EXPECT_EQ(preset("figS1_f").cavity.r1_sq, 0.85);
  const double expected[] = {0.999995, 0.99995, 0.9997, 0.999, 0.99, 0.85};
  const char* names[] = {"figS1_a", "figS1_b", "figS1_c", "figS1_d", "figS1_e", "figS1_f"};
  for (int i = 0; i < 6; ++i) {
    const auto c = preset(names[i]).cavity;
    EXPECT_EQ(c.r1_sq, expected[i]);
    EXPECT_EQ(c.r2_sq, 0.958);
    EXPECT_EQ(c.r0_sq, 0.99);
    EXPECT_EQ(c.loss1, 0.0);
    EXPECT_EQ(c.length1, c.length2);
  }
  const auto c2 = preset("case2_single");
  EXPECT_EQ(c2.cavity.r2_sq, 0.968);
  EXPECT_EQ(c2.cavity.r0_sq, 0.998);
  EXPECT_EQ(c2.cavity.length2, 0.0295);
  EXPECT_EQ(c2.omega_hz(), 2.5e6);
  EXPECT_NEAR(c2.input_state().var_y, 2.51189, 1e-5);
}

TEST(Presets, AllValidateAndUnknownThrows) {
  for (const auto& name : preset_names()) EXPECT_NO_THROW(preset(name).validate()) << name;
  EXPECT_THROW(preset("figS3"), ConfigError);
}
