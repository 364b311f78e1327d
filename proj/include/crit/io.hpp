#pragma once

// Sweep serialization. CSV is the plotting/fit interchange format; JSON
// additionally carries var_lo and an echo of the run parameters.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "crit/config.hpp"
#include "crit/error.hpp"
#include "crit/format.hpp"
#include "crit/quantum.hpp"
#include "crit/sweep.hpp"

namespace crit {

inline constexpr int kSchemaVersion = 1;

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"detuning_hz",    "detuning_fsr", "phi1_rad",   "phi2_rad",
                                             "rho_plus",       "theta_plus_rad", "rho_minus", "theta_minus_rad",
                                             "intensity",      "var_x",        "var_y",      "var_x_db",
                                             "var_y_db"};
  return cols;
}

inline void write_csv(const SweepResult& result, std::ostream& out) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const SweepRecord& r : result.records) {
    const double row[] = {r.detuning_hz, r.detuning_fsr, r.phi1,      r.phi2,
                          r.rho_plus,    r.theta_plus,   r.rho_minus, r.theta_minus,
                          r.intensity,   r.var_x,        r.var_y,     variance_to_db(r.var_x),
                          variance_to_db(r.var_y)};
    for (std::size_t i = 0; i < std::size(row); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

namespace detail {

inline nlohmann::json record_to_json(const SweepRecord& r) {
  return {{"detuning_hz", r.detuning_hz}, {"detuning_fsr", r.detuning_fsr}, {"phi1_rad", r.phi1},
          {"phi2_rad", r.phi2},           {"rho_plus", r.rho_plus},         {"theta_plus_rad", r.theta_plus},
          {"rho_minus", r.rho_minus},     {"theta_minus_rad", r.theta_minus}, {"intensity", r.intensity},
          {"var_x", r.var_x},             {"var_y", r.var_y},               {"var_lo", r.var_lo}};
}

inline double json_number(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw InputError(std::string("JSON record lacks numeric '") + key + "'");
  return it->get<double>();
}

}  // namespace detail

/// `metadata` is copied verbatim under "metadata" (preset name, spans, ...).
inline nlohmann::json result_to_json(const SweepResult& result, const nlohmann::json& metadata = nlohmann::json::object()) {
  const CoupledCavityConfig& c = result.config;
  nlohmann::json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["config"] = {{"r0", c.r0},
                   {"r1", c.r1},
                   {"r2", c.r2},
                   {"t1", c.t1},
                   {"t2", c.t2},
                   {"length1", c.length1},
                   {"length2", c.length2},
                   {"index1", c.index1},
                   {"index2", c.index2},
                   {"variant", to_string(c.variant)},
                   {"topology", to_string(c.topology)},
                   {"phi1_offset", c.phi1_offset},
                   {"phi2_offset", c.phi2_offset},
                   {"fsr1_hz", c.fsr1()},
                   {"fsr2_hz", c.fsr2()}};
  doc["input"] = {{"var_x", result.input.var_x}, {"var_y", result.input.var_y}};
  doc["detection"] = {{"eta", result.detection.eta}, {"lo_phase", result.detection.lo_phase}};
  doc["scan"] = {{"mode", to_string(result.scan.mode)},
                 {"span", result.scan.span},
                 {"points", result.scan.points},
                 {"gain_ratio", result.scan.gain_ratio},
                 {"wavelength", result.scan.wavelength}};
  doc["omega_hz"] = result.omega_hz;
  doc["metadata"] = metadata;
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : result.records) records.push_back(detail::record_to_json(r));
  doc["records"] = std::move(records);
  return doc;
}

inline void write_json(const SweepResult& result, std::ostream& out,
                       const nlohmann::json& metadata = nlohmann::json::object()) {
  out << result_to_json(result, metadata).dump(1) << '\n';
}

inline SweepResult result_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("schema_version", 0) != kSchemaVersion)
    throw InputError("unsupported or missing schema_version");
  SweepResult result;
  const auto& c = doc.at("config");
  result.config.r0 = detail::json_number(c, "r0");
  result.config.r1 = detail::json_number(c, "r1");
  result.config.r2 = detail::json_number(c, "r2");
  result.config.t1 = detail::json_number(c, "t1");
  result.config.t2 = detail::json_number(c, "t2");
  result.config.length1 = detail::json_number(c, "length1");
  result.config.length2 = detail::json_number(c, "length2");
  result.config.index1 = detail::json_number(c, "index1");
  result.config.index2 = detail::json_number(c, "index2");
  result.config.phi1_offset = detail::json_number(c, "phi1_offset");
  result.config.phi2_offset = detail::json_number(c, "phi2_offset");
  result.config.variant =
      c.at("variant") == "as_printed" ? ModelVariant::AsPrinted : ModelVariant::SymmetricNumerator;
  result.config.topology = c.at("topology") == "single" ? Topology::SingleCavity : Topology::Coupled;
  result.input = {detail::json_number(doc.at("input"), "var_x"), detail::json_number(doc.at("input"), "var_y")};
  result.detection = {detail::json_number(doc.at("detection"), "eta"),
                      detail::json_number(doc.at("detection"), "lo_phase")};
  const auto& s = doc.at("scan");
  result.scan.mode = s.at("mode") == "mirror" ? ScanMode::MirrorScan : ScanMode::FrequencyScan;
  result.scan.span = detail::json_number(s, "span");
  result.scan.points = s.at("points").get<std::size_t>();
  result.scan.gain_ratio = detail::json_number(s, "gain_ratio");
  result.scan.wavelength = detail::json_number(s, "wavelength");
  result.omega_hz = detail::json_number(doc, "omega_hz");
  for (const auto& r : doc.at("records")) {
    SweepRecord rec;
    rec.detuning_hz = detail::json_number(r, "detuning_hz");
    rec.detuning_fsr = detail::json_number(r, "detuning_fsr");
    rec.phi1 = detail::json_number(r, "phi1_rad");
    rec.phi2 = detail::json_number(r, "phi2_rad");
    rec.rho_plus = detail::json_number(r, "rho_plus");
    rec.theta_plus = detail::json_number(r, "theta_plus_rad");
    rec.rho_minus = detail::json_number(r, "rho_minus");
    rec.theta_minus = detail::json_number(r, "theta_minus_rad");
    rec.intensity = detail::json_number(r, "intensity");
    rec.var_x = detail::json_number(r, "var_x");
    rec.var_y = detail::json_number(r, "var_y");
    rec.var_lo = detail::json_number(r, "var_lo");
    result.records.push_back(rec);
  }
  return result;
}

inline SweepResult read_result_json(std::istream& in) {
  try {
    return result_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed result JSON: ") + e.what());
  }
}

inline void write_result(const SweepResult& result, OutputFormat format, std::ostream& out,
                         const nlohmann::json& metadata = nlohmann::json::object()) {
  if (format == OutputFormat::Json) write_json(result, out, metadata);
  else write_csv(result, out);
}

/// Writes to `path`, or to standard output when `path` is empty.
inline void write_result(const SweepResult& result, OutputFormat format, const std::string& path,
                         const nlohmann::json& metadata = nlohmann::json::object()) {
  if (path.empty()) {
    write_result(result, format, std::cout, metadata);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open '" + path + "' for writing");
  write_result(result, format, file, metadata);
  file.flush();
  if (!file) throw Error("failed writing '" + path + "'");
}

/// Measured or synthetic data as read from the CSV schema. Channels absent
/// from the file are left empty.
struct ObservedSpectrum {
  std::vector<double> detuning_hz;
  std::vector<double> var_x;
  std::vector<double> var_y;
  std::vector<double> intensity;
};

inline ObservedSpectrum observed_from_result(const SweepResult& result) {
  ObservedSpectrum obs;
  for (const auto& r : result.records) {
    obs.detuning_hz.push_back(r.detuning_hz);
    obs.var_x.push_back(r.var_x);
    obs.var_y.push_back(r.var_y);
    obs.intensity.push_back(r.intensity);
  }
  return obs;
}

/// Needs a detuning_hz column; picks up var_x, var_y and intensity when
/// present. Other columns are ignored.
inline ObservedSpectrum read_observed_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) header.emplace_back(trim(cell));
  }
  auto column = [&](std::string_view name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int det = column("detuning_hz");
  if (det < 0) throw InputError("CSV lacks a detuning_hz column");
  const int vx = column("var_x"), vy = column("var_y"), in_col = column("intensity");

  ObservedSpectrum obs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      const auto v = parse_double(trim(cell));
      if (!v) throw InputError("CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      cells.push_back(*v);
    }
    if (cells.size() != header.size())
      throw InputError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields");
    obs.detuning_hz.push_back(cells[det]);
    if (vx >= 0) obs.var_x.push_back(cells[vx]);
    if (vy >= 0) obs.var_y.push_back(cells[vy]);
    if (in_col >= 0) obs.intensity.push_back(cells[in_col]);
  }
  return obs;
}

}  // namespace crit
