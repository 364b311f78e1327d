#pragma once

// Run configuration: a sectioned key-value document (INI style) or its JSON
// equivalent. Reflectivities and losses are given as powers; amplitudes are
// derived on conversion.
//
//   [cavity]     r0_sq r1_sq r2_sq loss1 loss2 length1 length2 index1 index2
//                variant topology phi1_offset phi2_offset
//   [input]      s | squeeze_db antisqueeze_db | var_x var_y
//   [sideband]   omega_hz | omega_fsr_fraction
//   [detection]  eta | visibility, lo_phase
//   [scan]       mode span|span_fsr points gain_ratio wavelength
//   [output]     path format

#include <cmath>
#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"

#include "crit/error.hpp"
#include "crit/format.hpp"
#include "crit/optics.hpp"
#include "crit/quantum.hpp"
#include "crit/sweep.hpp"

namespace crit {

struct CavitySettings {
  double r0_sq = 0.998;
  double r1_sq = 0.0;
  double r2_sq = 0.0;
  double loss1 = 0.0;  // round-trip power loss
  double loss2 = 0.0;
  double length1 = 0.0295;
  double length2 = 0.0295;
  double index1 = 1.0;
  double index2 = 1.0;
  ModelVariant variant = ModelVariant::SymmetricNumerator;
  Topology topology = Topology::Coupled;
  double phi1_offset = 0.0;
  double phi2_offset = 0.0;

  CoupledCavityConfig amplitudes() const {
    CoupledCavityConfig c;
    c.r0 = std::sqrt(r0_sq);
    c.r1 = std::sqrt(r1_sq);
    c.r2 = std::sqrt(r2_sq);
    c.t1 = std::sqrt(1.0 - loss1);
    c.t2 = std::sqrt(1.0 - loss2);
    c.length1 = length1;
    c.length2 = length2;
    c.index1 = index1;
    c.index2 = index2;
    c.variant = variant;
    c.topology = topology;
    c.phi1_offset = phi1_offset;
    c.phi2_offset = phi2_offset;
    return c;
  }

  bool operator==(const CavitySettings&) const = default;
};

struct SqueezeFactor {
  double s = 0.0;
  bool operator==(const SqueezeFactor&) const = default;
};
struct SqueezeDecibels {
  double squeeze_db = 0.0;
  double antisqueeze_db = 0.0;
  bool operator==(const SqueezeDecibels&) const = default;
};
struct DirectVariances {
  double var_x = 1.0;
  double var_y = 1.0;
  bool operator==(const DirectVariances&) const = default;
};
using InputSpec = std::variant<SqueezeFactor, SqueezeDecibels, DirectVariances>;

struct OmegaHz {
  double value = 0.0;
  bool operator==(const OmegaHz&) const = default;
};
struct OmegaFsrFraction {
  double value = 0.0;
  bool operator==(const OmegaFsrFraction&) const = default;
};
using SidebandSpec = std::variant<OmegaHz, OmegaFsrFraction>;

struct Efficiency {
  double eta = 1.0;
  bool operator==(const Efficiency&) const = default;
};
struct Visibility {
  double visibility = 1.0;
  bool operator==(const Visibility&) const = default;
};

struct DetectionSettings {
  std::variant<Efficiency, Visibility> efficiency = Efficiency{};
  double lo_phase = 0.0;
  bool operator==(const DetectionSettings&) const = default;
};

struct SpanNative {  // Hz, or metres of M1 travel for mirror scans
  double value = 0.0;
  bool operator==(const SpanNative&) const = default;
};
struct SpanFsr {  // fraction of the input cavity's FSR
  double fraction = 0.0;
  bool operator==(const SpanFsr&) const = default;
};

struct ScanSettings {
  ScanMode mode = ScanMode::FrequencyScan;
  std::variant<SpanNative, SpanFsr> span = SpanFsr{0.04};
  std::size_t points = 2001;
  double gain_ratio = 2.0;
  double wavelength = 1064e-9;
  bool operator==(const ScanSettings&) const = default;
};

enum class OutputFormat { Csv, Json };

inline const char* to_string(OutputFormat f) { return f == OutputFormat::Json ? "json" : "csv"; }

struct OutputSettings {
  std::string path;  // empty: standard output
  OutputFormat format = OutputFormat::Csv;
  bool operator==(const OutputSettings&) const = default;
};

struct RunConfig {
  CavitySettings cavity;
  InputSpec input = SqueezeFactor{0.0};
  SidebandSpec sideband = OmegaFsrFraction{0.0005};
  DetectionSettings detection;
  ScanSettings scan;
  OutputSettings output;

  CoupledCavityConfig cavity_config() const { return cavity.amplitudes(); }

  InputGaussianState input_state() const {
    return std::visit(
        [](const auto& in) -> InputGaussianState {
          using T = std::decay_t<decltype(in)>;
          if constexpr (std::is_same_v<T, SqueezeFactor>) return input_from_squeeze_factor(in.s);
          else if constexpr (std::is_same_v<T, SqueezeDecibels>)
            return input_from_db(in.squeeze_db, in.antisqueeze_db);
          else {
            InputGaussianState st{in.var_x, in.var_y};
            st.validate();
            return st;
          }
        },
        input);
  }

  double omega_hz() const {
    if (const auto* hz = std::get_if<OmegaHz>(&sideband)) return hz->value;
    return std::get<OmegaFsrFraction>(sideband).value * cavity_config().fsr2();
  }

  DetectionModel detection_model() const {
    if (const auto* e = std::get_if<Efficiency>(&detection.efficiency)) return {e->eta, detection.lo_phase};
    const double v = std::get<Visibility>(detection.efficiency).visibility;
    return {v * v, detection.lo_phase};
  }

  ScanSpec scan_spec() const {
    ScanSpec spec;
    spec.mode = scan.mode;
    spec.points = scan.points;
    spec.gain_ratio = scan.gain_ratio;
    spec.wavelength = scan.wavelength;
    if (const auto* native = std::get_if<SpanNative>(&scan.span)) {
      spec.span = native->value;
    } else {
      const double fraction = std::get<SpanFsr>(scan.span).fraction;
      // One FSR of equivalent detuning is lambda / (2 n2) of M1 travel.
      spec.span = scan.mode == ScanMode::MirrorScan ? fraction * scan.wavelength / (2.0 * cavity.index2)
                                                    : fraction * cavity_config().fsr2();
    }
    return spec;
  }

  /// Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"cavity",
       {"r0_sq", "r1_sq", "r2_sq", "loss1", "loss2", "length1", "length2", "index1", "index2", "variant",
        "topology", "phi1_offset", "phi2_offset"}},
      {"input", {"s", "squeeze_db", "antisqueeze_db", "var_x", "var_y"}},
      {"sideband", {"omega_hz", "omega_fsr_fraction"}},
      {"detection", {"eta", "visibility", "lo_phase"}},
      {"scan", {"mode", "span", "span_fsr", "points", "gain_ratio", "wavelength"}},
      {"output", {"path", "format"}},
  };
  return keys;
}

inline std::vector<ConfigEntry> parse_ini(std::string_view text) {
  std::vector<ConfigEntry> entries;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", "unterminated section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_keys().contains(section)) throw ConfigError(section, "unknown section", line_no);
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("", "expected 'key = value'", line_no);
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw ConfigError("", "missing key before '='", line_no);
      if (section.empty()) throw ConfigError(key, "key outside of any section", line_no);
      entries.push_back({section, key, value, line_no});
    }
    if (eol == text.size()) break;
  }
  return entries;
}

inline std::vector<ConfigEntry> parse_json_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("JSON syntax error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "JSON config must be an object of sections");
  std::vector<ConfigEntry> entries;
  for (const auto& [section, body] : doc.items()) {
    if (!known_keys().contains(section)) throw ConfigError(section, "unknown section");
    if (!body.is_object()) throw ConfigError(section, "section must be an object");
    for (const auto& [key, value] : body.items()) {
      std::string text_value;
      if (value.is_number()) text_value = format_double(value.get<double>());
      else if (value.is_string()) text_value = value.get<std::string>();
      else throw ConfigError(section + "." + key, "value must be a number or a string");
      entries.push_back({section, key, text_value, 0});
    }
  }
  return entries;
}

class EntryView {
public:
  EntryView(const std::vector<ConfigEntry>& entries, std::string section) : section_(std::move(section)) {
    for (const auto& e : entries)
      if (e.section == section_) by_key_[e.key] = &e;
  }

  bool has(const std::string& key) const { return by_key_.contains(key); }
  bool any() const { return !by_key_.empty(); }

  double number(const std::string& key) const {
    const ConfigEntry& e = *by_key_.at(key);
    const auto v = parse_double(e.value);
    if (!v) throw ConfigError(key, "expected a number, got '" + e.value + "'", e.line);
    return *v;
  }

  std::string text(const std::string& key) const { return by_key_.at(key)->value; }
  int line(const std::string& key) const { return by_key_.at(key)->line; }

  void number_into(const std::string& key, double& out) const {
    if (has(key)) out = number(key);
  }

private:
  std::string section_;
  std::map<std::string, const ConfigEntry*> by_key_;
};

inline void check_entries(const std::vector<ConfigEntry>& entries) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : entries) {
    if (!known_keys().at(e.section).contains(e.key))
      throw ConfigError(e.section + "." + e.key, "unknown key", e.line);
    if (!seen.insert({e.section, e.key}).second)
      throw ConfigError(e.section + "." + e.key, "duplicate key", e.line);
  }
}

inline void apply_entries(RunConfig& cfg, const std::vector<ConfigEntry>& entries) {
  check_entries(entries);

  const EntryView cavity(entries, "cavity");
  auto& c = cfg.cavity;
  cavity.number_into("r0_sq", c.r0_sq);
  cavity.number_into("r1_sq", c.r1_sq);
  cavity.number_into("r2_sq", c.r2_sq);
  cavity.number_into("loss1", c.loss1);
  cavity.number_into("loss2", c.loss2);
  cavity.number_into("length1", c.length1);
  cavity.number_into("length2", c.length2);
  cavity.number_into("index1", c.index1);
  cavity.number_into("index2", c.index2);
  cavity.number_into("phi1_offset", c.phi1_offset);
  cavity.number_into("phi2_offset", c.phi2_offset);
  if (cavity.has("variant")) {
    const std::string v = cavity.text("variant");
    if (v == "symmetric") c.variant = ModelVariant::SymmetricNumerator;
    else if (v == "as_printed") c.variant = ModelVariant::AsPrinted;
    else throw ConfigError("variant", "expected 'symmetric' or 'as_printed'", cavity.line("variant"));
  }
  if (cavity.has("topology")) {
    const std::string t = cavity.text("topology");
    if (t == "coupled") c.topology = Topology::Coupled;
    else if (t == "single") c.topology = Topology::SingleCavity;
    else throw ConfigError("topology", "expected 'coupled' or 'single'", cavity.line("topology"));
  }

  const EntryView input(entries, "input");
  if (input.any()) {
    const bool factor = input.has("s");
    const bool db = input.has("squeeze_db") || input.has("antisqueeze_db");
    const bool direct = input.has("var_x") || input.has("var_y");
    if (int(factor) + int(db) + int(direct) != 1)
      throw ConfigError("input", "use exactly one of: s | squeeze_db+antisqueeze_db | var_x+var_y");
    if (factor) cfg.input = SqueezeFactor{input.number("s")};
    if (db) {
      if (!input.has("squeeze_db") || !input.has("antisqueeze_db"))
        throw ConfigError("input", "squeeze_db and antisqueeze_db must be given together");
      cfg.input = SqueezeDecibels{input.number("squeeze_db"), input.number("antisqueeze_db")};
    }
    if (direct) {
      if (!input.has("var_x") || !input.has("var_y"))
        throw ConfigError("input", "var_x and var_y must be given together");
      cfg.input = DirectVariances{input.number("var_x"), input.number("var_y")};
    }
  }

  const EntryView sideband(entries, "sideband");
  if (sideband.has("omega_hz") && sideband.has("omega_fsr_fraction"))
    throw ConfigError("sideband", "use exactly one of omega_hz | omega_fsr_fraction");
  if (sideband.has("omega_hz")) cfg.sideband = OmegaHz{sideband.number("omega_hz")};
  if (sideband.has("omega_fsr_fraction")) cfg.sideband = OmegaFsrFraction{sideband.number("omega_fsr_fraction")};

  const EntryView detection(entries, "detection");
  if (detection.has("eta") && detection.has("visibility"))
    throw ConfigError("detection", "use exactly one of eta | visibility");
  if (detection.has("eta")) cfg.detection.efficiency = Efficiency{detection.number("eta")};
  if (detection.has("visibility")) cfg.detection.efficiency = Visibility{detection.number("visibility")};
  detection.number_into("lo_phase", cfg.detection.lo_phase);

  const EntryView scan(entries, "scan");
  if (scan.has("mode")) {
    const std::string m = scan.text("mode");
    if (m == "frequency") cfg.scan.mode = ScanMode::FrequencyScan;
    else if (m == "mirror") cfg.scan.mode = ScanMode::MirrorScan;
    else throw ConfigError("mode", "expected 'frequency' or 'mirror'", scan.line("mode"));
  }
  if (scan.has("span") && scan.has("span_fsr")) throw ConfigError("scan", "use exactly one of span | span_fsr");
  if (scan.has("span")) cfg.scan.span = SpanNative{scan.number("span")};
  if (scan.has("span_fsr")) cfg.scan.span = SpanFsr{scan.number("span_fsr")};
  if (scan.has("points")) {
    const double p = scan.number("points");
    if (!(p >= 3.0 && p == std::floor(p) && p < 1e9))
      throw ConfigError("points", "must be an integer >= 3", scan.line("points"));
    cfg.scan.points = static_cast<std::size_t>(p);
  }
  scan.number_into("gain_ratio", cfg.scan.gain_ratio);
  scan.number_into("wavelength", cfg.scan.wavelength);

  const EntryView output(entries, "output");
  if (output.has("path")) cfg.output.path = output.text("path");
  if (output.has("format")) {
    const std::string f = output.text("format");
    if (f == "csv") cfg.output.format = OutputFormat::Csv;
    else if (f == "json") cfg.output.format = OutputFormat::Json;
    else throw ConfigError("format", "expected 'csv' or 'json'", output.line("format"));
  }
}

}  // namespace detail

inline void RunConfig::validate() const {
  auto unit = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(name, "must lie in [0, 1], got " + format_double(v));
  };
  unit("r0_sq", cavity.r0_sq);
  unit("r1_sq", cavity.r1_sq);
  unit("r2_sq", cavity.r2_sq);
  auto loss = [](const char* name, double v) {
    if (!(v >= 0.0 && v < 1.0)) throw ConfigError(name, "must lie in [0, 1), got " + format_double(v));
  };
  loss("loss1", cavity.loss1);
  loss("loss2", cavity.loss2);
  auto positive = [](const char* name, double v) {
    if (!(v > 0.0 && std::isfinite(v))) throw ConfigError(name, "must be positive, got " + format_double(v));
  };
  positive("length1", cavity.length1);
  positive("length2", cavity.length2);
  if (!(cavity.index1 >= 1.0 && std::isfinite(cavity.index1))) throw ConfigError("index1", "must be >= 1");
  if (!(cavity.index2 >= 1.0 && std::isfinite(cavity.index2))) throw ConfigError("index2", "must be >= 1");
  if (!std::isfinite(cavity.phi1_offset)) throw ConfigError("phi1_offset", "must be finite");
  if (!std::isfinite(cavity.phi2_offset)) throw ConfigError("phi2_offset", "must be finite");

  try {
    input_state();
  } catch (const InputError& e) {
    throw ConfigError("input", e.what());
  }

  const double omega = omega_hz();
  if (!(omega >= 0.0 && std::isfinite(omega)))
    throw ConfigError(std::holds_alternative<OmegaHz>(sideband) ? "omega_hz" : "omega_fsr_fraction",
                      "must be finite and >= 0");

  if (const auto* e = std::get_if<Efficiency>(&detection.efficiency)) {
    if (!(e->eta > 0.0 && e->eta <= 1.0)) throw ConfigError("eta", "must lie in (0, 1]");
  } else if (const double v = std::get<Visibility>(detection.efficiency).visibility; !(v > 0.0 && v <= 1.0)) {
    throw ConfigError("visibility", "must lie in (0, 1]");
  }
  if (!std::isfinite(detection.lo_phase)) throw ConfigError("lo_phase", "must be finite");

  if (scan.points < 3) throw ConfigError("points", "must be an integer >= 3");
  const double span = std::holds_alternative<SpanNative>(scan.span) ? std::get<SpanNative>(scan.span).value
                                                                    : std::get<SpanFsr>(scan.span).fraction;
  if (!(span >= 0.0 && std::isfinite(span)))
    throw ConfigError(std::holds_alternative<SpanNative>(scan.span) ? "span" : "span_fsr",
                      "must be finite and >= 0");
  if (!(scan.wavelength > 0.0 && std::isfinite(scan.wavelength))) throw ConfigError("wavelength", "must be positive");
  if (!std::isfinite(scan.gain_ratio)) throw ConfigError("gain_ratio", "must be finite");
}

inline bool looks_like_json(std::string_view text) {
  const std::string_view t = trim(text);
  return !t.empty() && t.front() == '{';
}

/// Parses `text` on top of `base` (keys absent from the document keep the
/// base value), then validates.
inline RunConfig load_config(std::string_view text, const RunConfig& base) {
  RunConfig cfg = base;
  detail::apply_entries(cfg, looks_like_json(text) ? detail::parse_json_config(text) : detail::parse_ini(text));
  cfg.validate();
  return cfg;
}

/// A document must at least name the C2 mirrors: [cavity] r1_sq and r2_sq.
inline RunConfig load_config(std::string_view text) {
  const auto entries = looks_like_json(text) ? detail::parse_json_config(text) : detail::parse_ini(text);
  for (const char* required : {"r1_sq", "r2_sq"}) {
    const bool present = std::any_of(entries.begin(), entries.end(), [&](const detail::ConfigEntry& e) {
      return e.section == "cavity" && e.key == required;
    });
    if (!present) throw ConfigError(required, "required key missing from [cavity]");
  }
  RunConfig cfg;
  detail::apply_entries(cfg, entries);
  cfg.validate();
  return cfg;
}

/// Canonical INI text; load_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  const auto& c = cfg.cavity;
  out << "[cavity]\n"
      << "r0_sq = " << format_double(c.r0_sq) << "\n"
      << "r1_sq = " << format_double(c.r1_sq) << "\n"
      << "r2_sq = " << format_double(c.r2_sq) << "\n"
      << "loss1 = " << format_double(c.loss1) << "\n"
      << "loss2 = " << format_double(c.loss2) << "\n"
      << "length1 = " << format_double(c.length1) << "\n"
      << "length2 = " << format_double(c.length2) << "\n"
      << "index1 = " << format_double(c.index1) << "\n"
      << "index2 = " << format_double(c.index2) << "\n"
      << "variant = " << to_string(c.variant) << "\n"
      << "topology = " << to_string(c.topology) << "\n"
      << "phi1_offset = " << format_double(c.phi1_offset) << "\n"
      << "phi2_offset = " << format_double(c.phi2_offset) << "\n\n[input]\n";
  std::visit(
      [&](const auto& in) {
        using T = std::decay_t<decltype(in)>;
        if constexpr (std::is_same_v<T, SqueezeFactor>) out << "s = " << format_double(in.s) << "\n";
        else if constexpr (std::is_same_v<T, SqueezeDecibels>)
          out << "squeeze_db = " << format_double(in.squeeze_db) << "\nantisqueeze_db = "
              << format_double(in.antisqueeze_db) << "\n";
        else out << "var_x = " << format_double(in.var_x) << "\nvar_y = " << format_double(in.var_y) << "\n";
      },
      cfg.input);
  out << "\n[sideband]\n";
  if (const auto* hz = std::get_if<OmegaHz>(&cfg.sideband)) out << "omega_hz = " << format_double(hz->value) << "\n";
  else out << "omega_fsr_fraction = " << format_double(std::get<OmegaFsrFraction>(cfg.sideband).value) << "\n";
  out << "\n[detection]\n";
  if (const auto* e = std::get_if<Efficiency>(&cfg.detection.efficiency)) out << "eta = " << format_double(e->eta) << "\n";
  else out << "visibility = " << format_double(std::get<Visibility>(cfg.detection.efficiency).visibility) << "\n";
  out << "lo_phase = " << format_double(cfg.detection.lo_phase) << "\n\n[scan]\n"
      << "mode = " << to_string(cfg.scan.mode) << "\n";
  if (const auto* s = std::get_if<SpanNative>(&cfg.scan.span)) out << "span = " << format_double(s->value) << "\n";
  else out << "span_fsr = " << format_double(std::get<SpanFsr>(cfg.scan.span).fraction) << "\n";
  out << "points = " << cfg.scan.points << "\n"
      << "gain_ratio = " << format_double(cfg.scan.gain_ratio) << "\n"
      << "wavelength = " << format_double(cfg.scan.wavelength) << "\n\n[output]\n";
  if (!cfg.output.path.empty()) out << "path = " << cfg.output.path << "\n";
  out << "format = " << to_string(cfg.output.format) << "\n";
  return out.str();
}

}  // namespace crit
