#pragma once

// Command-line front end. run_cli never calls exit(); it returns the status
// and writes to the streams it is given so tests can drive it in-process.
//
// exit status: 0 ok, 1 usage, 2 configuration, 3 runtime/numerical

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "crit/analysis.hpp"
#include "crit/config.hpp"
#include "crit/error.hpp"
#include "crit/fit.hpp"
#include "crit/invariants.hpp"
#include "crit/io.hpp"
#include "crit/presets.hpp"
#include "crit/sweep.hpp"

namespace crit {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitConfig = 2, kExitRuntime = 3 };

namespace detail {

struct CliOptions {
  std::string config_path;
  std::string preset_name;
  std::string output_path;
  std::string format;
  std::optional<std::size_t> points;
  std::optional<double> span;
  std::optional<double> span_fsr;
  unsigned threads = 1;

  std::string fit_input;
  std::vector<std::string> fit_free;
  std::string fit_domain = "db";
  std::size_t fit_max_evals = 10000;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Preset first, then the config document on top, then command-line flags.
inline RunConfig resolve_config(const CliOptions& o) {
  if (o.config_path.empty() && o.preset_name.empty()) throw UsageError("one of --config or --preset is required");
  RunConfig cfg;
  if (!o.preset_name.empty()) cfg = preset(o.preset_name);
  if (!o.config_path.empty()) {
    const std::string text = read_file(o.config_path);
    cfg = o.preset_name.empty() ? load_config(text) : load_config(text, cfg);
  }
  if (o.points) cfg.scan.points = *o.points;
  if (o.span && o.span_fsr) throw UsageError("--span and --span-fsr are mutually exclusive");
  if (o.span) cfg.scan.span = SpanNative{*o.span};
  if (o.span_fsr) cfg.scan.span = SpanFsr{*o.span_fsr};
  if (!o.output_path.empty()) cfg.output.path = o.output_path;

  std::optional<OutputFormat> from_flag;
  if (o.format == "csv") from_flag = OutputFormat::Csv;
  else if (o.format == "json") from_flag = OutputFormat::Json;
  std::optional<OutputFormat> from_ext;
  if (!o.output_path.empty()) {
    const std::string ext = std::filesystem::path(o.output_path).extension().string();
    if (ext == ".csv") from_ext = OutputFormat::Csv;
    else if (ext == ".json") from_ext = OutputFormat::Json;
  }
  if (from_flag && from_ext && *from_flag != *from_ext)
    throw UsageError("--format " + o.format + " conflicts with output file extension");
  if (from_flag) cfg.output.format = *from_flag;
  else if (from_ext) cfg.output.format = *from_ext;

  cfg.validate();
  return cfg;
}

inline nlohmann::json run_metadata(const RunConfig& cfg, const CliOptions& o, const char* command) {
  const ScanSpec spec = cfg.scan_spec();
  const double fsr = cfg.cavity_config().fsr2();
  const double span_fsr = cfg.scan.mode == ScanMode::MirrorScan
                              ? spec.span * 2.0 * cfg.cavity.index2 / cfg.scan.wavelength
                              : spec.span / fsr;
  return {{"command", command},
          {"preset", o.preset_name},
          {"r0_sq", cfg.cavity.r0_sq},
          {"r1_sq", cfg.cavity.r1_sq},
          {"r2_sq", cfg.cavity.r2_sq},
          {"span_fsr", span_fsr},
          {"points", spec.points}};
}

inline SweepResult run_spectrum(const RunConfig& cfg, unsigned threads) {
  return run_scan(cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.scan_spec(), cfg.detection_model(),
                  {threads});
}

inline Series series_of(const SweepResult& r, double SweepRecord::*field) {
  Series s;
  s.reserve(r.records.size());
  for (const auto& rec : r.records) s.push_back({rec.detuning_fsr, rec.*field});
  return s;
}

inline nlohmann::json describe_series(const Series& s) {
  const ProfileLabel label = classify_profile(s);
  const WindowMetrics w = window_metrics(s);
  return {{"label", to_string(label.label)},
          {"signature", label.signature},
          {"window",
           {{"has_window", w.has_window},
            {"window_height", w.window_height},
            {"window_fwhm_fsr", w.window_fwhm},
            {"envelope_fwhm_fsr", w.envelope_fwhm},
            {"splitting_fsr", w.splitting}}}};
}

template <typename Fn>
void with_output(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty()) {
    fn(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open '" + path + "' for writing");
  fn(file);
  file.flush();
  if (!file) throw Error("failed writing '" + path + "'");
}

inline FreeParameter parse_free(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw UsageError("--free expects name:lo:hi, got '" + spec + "'");
  const auto which = fit_parameter_from_string(parts[0]);
  if (!which) throw UsageError("unknown fit parameter '" + parts[0] + "'");
  const auto lo = parse_double(parts[1]);
  const auto hi = parse_double(parts[2]);
  if (!lo || !hi) throw UsageError("bad bounds in --free '" + spec + "'");
  return {*which, *lo, *hi};
}

inline int cmd_fit(const RunConfig& cfg, const CliOptions& o, std::ostream& out) {
  if (o.fit_input.empty()) throw UsageError("fit needs --input CSV");
  if (o.fit_free.empty()) throw UsageError("fit needs at least one --free name:lo:hi");
  std::ifstream in(o.fit_input, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + o.fit_input + "'");

  FitProblem problem;
  problem.observed = read_observed_csv(in);
  problem.model = {cfg.cavity_config(), cfg.input_state(), cfg.omega_hz(), cfg.detection_model(), 0.0, 1.0};
  if (o.fit_domain == "linear") problem.domain = ObjectiveDomain::Linear;
  else if (o.fit_domain == "db") problem.domain = ObjectiveDomain::Decibel;
  else throw UsageError("--domain must be linear or db");
  std::vector<double> guess;
  for (const auto& f : o.fit_free) {
    problem.free.push_back(parse_free(f));
    guess.push_back(get_parameter(problem.model, problem.free.back().which));
  }
  const FitResult r = fit_parameters(problem, guess, o.fit_max_evals);

  nlohmann::json doc;
  for (const auto& e : r.estimates) doc["estimates"][to_string(e.which)] = e.value;
  doc["residual"] = r.residual;
  doc["domain"] = to_string(problem.domain);
  doc["evaluations"] = r.evaluations;
  doc["converged"] = r.converged;
  with_output(cfg.output.path, out, [&](std::ostream& os) { os << doc.dump(1) << '\n'; });
  return r.converged ? kExitOk : kExitRuntime;
}

inline int cmd_validate(std::ostream& out) {
  const auto checks = run_invariant_checks();
  std::size_t passed = 0;
  for (const auto& c : checks) {
    passed += c.passed;
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " (worst " << format_double(c.worst) << ", limit "
        << format_double(c.tolerance) << ")\n";
  }
  out << passed << " passed, " << checks.size() - passed << " failed\n";
  return passed == checks.size() ? kExitOk : kExitRuntime;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  detail::CliOptions o;
  CLI::App app{"Coupled-cavity reflection and squeezed-light noise spectra", "crit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", o.config_path, "Run configuration (INI or JSON)");
  app.add_option("--preset", o.preset_name, "Named parameter set; --config overrides its fields");
  app.add_option("--output", o.output_path, "Output file (default: stdout)");
  app.add_option("--format", o.format, "csv or json (default: from --output extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--points", o.points, "Grid points")->check(CLI::Range(std::size_t{3}, std::size_t{100000000}));
  app.add_option("--span", o.span, "Full scan span in Hz (mirror mode: metres of M1 travel)");
  app.add_option("--span-fsr", o.span_fsr, "Full scan span as a fraction of the FSR");
  app.add_option("--threads", o.threads, "Worker threads for sweeps")->check(CLI::Range(1u, 256u));

  auto* reflectivity = app.add_subcommand("reflectivity", "Classical reflected intensity |R|^2");
  auto* spectrum = app.add_subcommand("spectrum", "Quadrature noise spectrum");
  auto* classify = app.add_subcommand("classify", "Line-shape labels and window metrics as JSON");
  auto* fit = app.add_subcommand("fit", "Fit model parameters to a CSV spectrum");
  fit->add_option("--input", o.fit_input, "Observed CSV (same schema as spectrum output)")->required();
  fit->add_option("--free", o.fit_free, "Free parameter as name:lo:hi (repeatable)")->required();
  fit->add_option("--domain", o.fit_domain, "Objective domain: db or linear")
      ->check(CLI::IsMember({"db", "linear"}));
  fit->add_option("--max-evals", o.fit_max_evals, "Objective evaluation budget");
  auto* presets = app.add_subcommand("presets", "List preset names");
  auto* validate = app.add_subcommand("validate", "Run the invariant checks");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (presets->parsed()) {
      for (const auto& name : preset_names()) out << name << '\n';
      return kExitOk;
    }
    if (validate->parsed()) return detail::cmd_validate(out);

    const RunConfig cfg = detail::resolve_config(o);
    if (fit->parsed()) return detail::cmd_fit(cfg, o, out);

    if (classify->parsed()) {
      const SweepResult r = detail::run_spectrum(cfg, o.threads);
      nlohmann::json doc = {{"metadata", detail::run_metadata(cfg, o, "classify")},
                            {"intensity", detail::describe_series(detail::series_of(r, &SweepRecord::intensity))},
                            {"var_x", detail::describe_series(detail::series_of(r, &SweepRecord::var_x))},
                            {"var_y", detail::describe_series(detail::series_of(r, &SweepRecord::var_y))}};
      detail::with_output(cfg.output.path, out, [&](std::ostream& os) { os << doc.dump(1) << '\n'; });
      return kExitOk;
    }

    const bool classical = reflectivity->parsed();
    const SweepResult r = classical ? intensity_scan(cfg.cavity_config(), cfg.scan_spec(), {o.threads})
                                    : detail::run_spectrum(cfg, o.threads);
    const auto meta = detail::run_metadata(cfg, o, classical ? "reflectivity" : "spectrum");
    detail::with_output(cfg.output.path, out,
                        [&](std::ostream& os) { write_result(r, cfg.output.format, os, meta); });
    (void)spectrum;
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace crit
