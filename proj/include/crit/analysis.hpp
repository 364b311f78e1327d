#pragma once

// Extremum detection and line-shape vocabulary for spectra: single peak/dip
// (V), M, W, triple dip/peak, and the split M/W of strongly coupled modes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crit/error.hpp"

namespace crit {

struct SeriesPoint {
  double detuning = 0.0;
  double value = 0.0;
};

using Series = std::vector<SeriesPoint>;

enum class ExtremumKind { Min, Max };

inline const char* to_string(ExtremumKind k) { return k == ExtremumKind::Max ? "Max" : "Min"; }

struct Extremum {
  std::size_t index = 0;  // grid index (plateau midpoint)
  double detuning = 0.0;
  double value = 0.0;
  ExtremumKind kind = ExtremumKind::Min;
  double prominence = 0.0;
};

enum class Profile { SinglePeak, SingleDip, M, W, TripleDip, TriplePeak, SplitM, SplitW, Flat, Other };

inline const char* to_string(Profile p) {
  switch (p) {
    case Profile::SinglePeak: return "SinglePeak";
    case Profile::SingleDip: return "SingleDip";
    case Profile::M: return "M";
    case Profile::W: return "W";
    case Profile::TripleDip: return "TripleDip";
    case Profile::TriplePeak: return "TriplePeak";
    case Profile::SplitM: return "SplitM";
    case Profile::SplitW: return "SplitW";
    case Profile::Flat: return "Flat";
    case Profile::Other: return "Other";
  }
  return "Other";
}

struct ProfileLabel {
  Profile label = Profile::Flat;
  std::string signature;  // e.g. "Max,Min,Max"
};

struct WindowMetrics {
  bool has_window = false;     // a central Max flanked by two Min exists
  double window_height = 0.0;  // central max - mean of flanking minima
  double window_fwhm = 0.0;
  double envelope_fwhm = 0.0;
  double splitting = 0.0;  // distance between the two deepest minima
};

inline constexpr double kDefaultProminenceFraction = 0.005;

inline double series_range(std::span<const SeriesPoint> series) {
  if (series.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(series.begin(), series.end(),
                                      [](const auto& a, const auto& b) { return a.value < b.value; });
  return hi->value - lo->value;
}

/// 0.5 % of the series range.
inline double default_min_prominence(std::span<const SeriesPoint> series) {
  return kDefaultProminenceFraction * series_range(series);
}

namespace detail {

inline void check_series(std::span<const SeriesPoint> series) {
  if (series.size() < 3) throw InputError("series needs at least 3 points");
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series[i].value) || !std::isfinite(series[i].detuning))
      throw InputError("series contains non-finite values");
    if (i > 0 && series[i].detuning < series[i - 1].detuning)
      throw InputError("series must be sorted by detuning");
  }
}

// Topographic prominence of the plateau [first, last] with value `v`:
// walk outwards until something strictly higher (for peaks) is found,
// keeping the lowest point seen; the higher of the two bases wins.
inline double prominence(std::span<const SeriesPoint> s, std::size_t first, std::size_t last, double v,
                         bool peak) {
  auto higher = [peak](double a, double b) { return peak ? a > b : a < b; };
  auto lower_of = [peak](double a, double b) { return peak ? std::min(a, b) : std::max(a, b); };
  double left_base = v;
  for (std::size_t i = first; i-- > 0;) {
    if (higher(s[i].value, v)) break;
    left_base = lower_of(left_base, s[i].value);
  }
  double right_base = v;
  for (std::size_t i = last + 1; i < s.size(); ++i) {
    if (higher(s[i].value, v)) break;
    right_base = lower_of(right_base, s[i].value);
  }
  return peak ? v - std::max(left_base, right_base) : std::min(left_base, right_base) - v;
}

inline double interpolate_crossing(const SeriesPoint& a, const SeriesPoint& b, double level) {
  if (b.value == a.value) return a.detuning;
  return a.detuning + (level - a.value) * (b.detuning - a.detuning) / (b.value - a.value);
}

// From `start`, walk in direction `step` (+1/-1) while the series stays above
// `level`; return the interpolated crossing, or the last grid point.
inline double walk_to_level(std::span<const SeriesPoint> s, std::size_t start, int step, double level) {
  std::size_t i = start;
  while (true) {
    if (step < 0 && i == 0) return s[0].detuning;
    if (step > 0 && i + 1 == s.size()) return s.back().detuning;
    const std::size_t next = step > 0 ? i + 1 : i - 1;
    if (s[next].value <= level) return interpolate_crossing(s[i], s[next], level);
    i = next;
  }
}

}  // namespace detail

/// Interior local extrema whose prominence is at least `min_prominence`.
/// Plateaus count once, located at their midpoint index (lower on ties).
inline std::vector<Extremum> find_extrema(std::span<const SeriesPoint> series, double min_prominence) {
  detail::check_series(series);
  std::vector<Extremum> out;
  const std::size_t n = series.size();
  std::size_t first = 0;
  while (first < n) {
    std::size_t last = first;
    while (last + 1 < n && series[last + 1].value == series[first].value) ++last;
    if (first > 0 && last + 1 < n) {
      const double v = series[first].value;
      const double before = series[first - 1].value;
      const double after = series[last + 1].value;
      std::optional<ExtremumKind> kind;
      if (before < v && after < v) kind = ExtremumKind::Max;
      if (before > v && after > v) kind = ExtremumKind::Min;
      if (kind) {
        const bool peak = *kind == ExtremumKind::Max;
        const double prom = detail::prominence(series, first, last, v, peak);
        if (prom >= min_prominence) {
          const std::size_t mid = first + (last - first) / 2;
          out.push_back({mid, series[mid].detuning, v, *kind, prom});
        }
      }
    }
    first = last + 1;
  }
  return out;
}

namespace detail {

// Width at half height of a (Max, Min, Max) group bounded by `floor` on the
// far side: outer half-crossing of the left shoulder to outer half-crossing
// of the right shoulder. Works on the sign-adjusted series.
struct Envelope {
  double left = 0.0;
  double right = 0.0;
  double width() const { return right - left; }
};

inline Envelope shoulder_envelope(std::span<const SeriesPoint> s, const Extremum& left_max,
                                  const Extremum& right_max, double floor) {
  const double half = 0.5 * (std::min(left_max.value, right_max.value) + floor);
  return {walk_to_level(s, left_max.index, -1, half), walk_to_level(s, right_max.index, +1, half)};
}

// Two M groups (extrema 0..2 and 4..6) around a central floor (extremum 3)
// are split when their separation exceeds the sum of their widths.
inline bool is_split(std::span<const SeriesPoint> s, const std::vector<Extremum>& ext) {
  const double floor = ext[3].value;
  const Envelope a = shoulder_envelope(s, ext[0], ext[2], floor);
  const Envelope b = shoulder_envelope(s, ext[4], ext[6], floor);
  return b.left - a.right > a.width() + b.width();
}

// Variation at rounding level only.
inline bool is_flat(std::span<const SeriesPoint> series) {
  double scale = 1.0;
  for (const auto& p : series) scale = std::max(scale, std::abs(p.value));
  return series_range(series) <= 1e-12 * scale;
}

}  // namespace detail

/// Maps the significant-extremum kind sequence to a line-shape label.
inline ProfileLabel classify_profile(std::span<const SeriesPoint> series, double min_prominence) {
  detail::check_series(series);
  ProfileLabel result;
  if (detail::is_flat(series)) return result;

  const std::vector<Extremum> ext = find_extrema(series, min_prominence);
  for (std::size_t i = 0; i < ext.size(); ++i) {
    if (i > 0) result.signature += ',';
    result.signature += to_string(ext[i].kind);
  }
  const std::string& sig = result.signature;
  if (ext.empty()) result.label = Profile::Flat;
  else if (sig == "Max") result.label = Profile::SinglePeak;
  else if (sig == "Min") result.label = Profile::SingleDip;
  else if (sig == "Max,Min,Max") result.label = Profile::M;
  else if (sig == "Min,Max,Min") result.label = Profile::W;
  else if (sig == "Min,Max,Min,Max,Min") result.label = Profile::TripleDip;
  else if (sig == "Max,Min,Max,Min,Max") result.label = Profile::TriplePeak;
  else if (sig == "Max,Min,Max,Min,Max,Min,Max") {
    result.label = detail::is_split(series, ext) ? Profile::SplitM : Profile::TripleDip;
  } else if (sig == "Min,Max,Min,Max,Min,Max,Min") {
    Series flipped(series.begin(), series.end());
    for (auto& p : flipped) p.value = -p.value;
    std::vector<Extremum> mirrored = ext;
    for (auto& e : mirrored) e.value = -e.value;
    result.label = detail::is_split(flipped, mirrored) ? Profile::SplitW : Profile::TriplePeak;
  } else {
    result.label = Profile::Other;
  }
  return result;
}

inline ProfileLabel classify_profile(std::span<const SeriesPoint> series) {
  return classify_profile(series, default_min_prominence(series));
}

/// Transparency-window and mode-splitting metrics of an intensity dip.
inline WindowMetrics window_metrics(std::span<const SeriesPoint> series) {
  detail::check_series(series);
  WindowMetrics m;
  if (detail::is_flat(series)) return m;
  const std::vector<Extremum> ext = find_extrema(series, default_min_prominence(series));

  std::vector<Extremum> minima;
  for (const auto& e : ext)
    if (e.kind == ExtremumKind::Min) minima.push_back(e);
  if (minima.size() >= 2) {
    std::stable_sort(minima.begin(), minima.end(),
                     [](const Extremum& a, const Extremum& b) { return a.value < b.value; });
    m.splitting = std::abs(minima[1].detuning - minima[0].detuning);
  }

  // Central max: flanked by minima on both sides, nearest the scan centre.
  const double centre = 0.5 * (series.front().detuning + series.back().detuning);
  std::optional<std::size_t> best;
  for (std::size_t i = 1; i + 1 < ext.size(); ++i) {
    if (ext[i].kind != ExtremumKind::Max || ext[i - 1].kind != ExtremumKind::Min ||
        ext[i + 1].kind != ExtremumKind::Min)
      continue;
    if (!best || std::abs(ext[i].detuning - centre) < std::abs(ext[*best].detuning - centre)) best = i;
  }
  if (best) {
    const Extremum& peak = ext[*best];
    const double base = 0.5 * (ext[*best - 1].value + ext[*best + 1].value);
    m.has_window = true;
    m.window_height = peak.value - base;
    const double level = base + 0.5 * m.window_height;
    m.window_fwhm = detail::walk_to_level(series, peak.index, +1, level) -
                    detail::walk_to_level(series, peak.index, -1, level);
  }

  const double baseline = 0.5 * (series.front().value + series.back().value);
  double deepest = series.front().value;
  for (const auto& p : series) deepest = std::min(deepest, p.value);
  const double level = 0.5 * (baseline + deepest);
  std::optional<std::size_t> first_below, last_below;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].value < level) {
      if (!first_below) first_below = i;
      last_below = i;
    }
  }
  if (first_below) {
    const std::size_t a = *first_below;
    const std::size_t b = *last_below;
    const double left = a == 0 ? series[0].detuning : detail::interpolate_crossing(series[a - 1], series[a], level);
    const double right = b + 1 == series.size() ? series[b].detuning
                                                : detail::interpolate_crossing(series[b], series[b + 1], level);
    m.envelope_fwhm = right - left;
  }
  return m;
}

}  // namespace crit
