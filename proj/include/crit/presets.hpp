#pragma once

// Named parameter sets. Names are stable.

#include <string>
#include <string_view>
#include <vector>

#include "crit/config.hpp"
#include "crit/error.hpp"

namespace crit {

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"figS1_a",      "figS1_b",       "figS1_c",      "figS1_d",
                                              "figS1_e",      "figS1_f",       "figS2",        "case1_single",
                                              "case1_coupled", "case2_single", "case2_coupled"};
  return names;
}

namespace detail {

inline RunConfig figs1_base(double r1_sq, double span_fsr, std::size_t points = 2001) {
  RunConfig cfg;
  cfg.cavity.r0_sq = 0.99;
  cfg.cavity.r1_sq = r1_sq;
  cfg.cavity.r2_sq = 0.958;
  cfg.input = SqueezeFactor{0.0};
  cfg.sideband = OmegaHz{0.0};
  cfg.scan.span = SpanFsr{span_fsr};
  cfg.scan.points = points;
  return cfg;
}

// M0 is only described as highly reflective; 0.998 is an assumption.
inline RunConfig case_base(double r1_sq, Topology topology, double span_fsr, std::size_t points = 2001) {
  RunConfig cfg;
  cfg.cavity.r0_sq = 0.998;
  cfg.cavity.r1_sq = r1_sq;
  cfg.cavity.r2_sq = 0.968;
  cfg.cavity.topology = topology;
  cfg.input = SqueezeDecibels{1.6, 4.0};
  cfg.sideband = OmegaHz{2.5e6};
  cfg.scan.span = SpanFsr{span_fsr};
  cfg.scan.points = points;
  return cfg;
}

// Split-mode scans cover a whole FSR; the split resonances are only a few
// thousandths of an FSR wide, so these grids are denser.
inline constexpr std::size_t kWideScanPoints = 6001;

}  // namespace detail

inline RunConfig preset(std::string_view name) {
  using detail::case_base;
  using detail::figs1_base;
  if (name == "figS1_a") return figs1_base(0.999995, 0.04);
  if (name == "figS1_b") return figs1_base(0.99995, 0.04);
  if (name == "figS1_c") return figs1_base(0.9997, 0.04);
  if (name == "figS1_d") return figs1_base(0.999, 0.04);
  if (name == "figS1_e") return figs1_base(0.99, 0.12);
  if (name == "figS1_f") return figs1_base(0.85, 1.2, detail::kWideScanPoints);
  if (name == "figS2") {
    RunConfig cfg = figs1_base(0.999, 0.04);
    cfg.input = SqueezeFactor{0.5};
    cfg.sideband = OmegaFsrFraction{0.0005};
    return cfg;
  }
  if (name == "case1_single") return case_base(0.998, Topology::SingleCavity, 0.04);
  if (name == "case1_coupled") return case_base(0.998, Topology::Coupled, 0.04);
  if (name == "case2_single") return case_base(0.967, Topology::SingleCavity, 0.04);
  if (name == "case2_coupled") return case_base(0.967, Topology::Coupled, 1.2, detail::kWideScanPoints);
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
}

}  // namespace crit
