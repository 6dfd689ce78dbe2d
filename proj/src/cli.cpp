#include "wvamp/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wvamp/errors.hpp"
#include "wvamp/spectral.hpp"
#include "wvamp/weakmeas.hpp"

namespace wvamp {

namespace {

using Json = nlohmann::ordered_json;

const char* command_name(Command c) {
  switch (c) {
    case Command::Sweep: return "sweep";
    case Command::Verify: return "verify";
    case Command::WeakValues: return "weak-values";
    case Command::Spectral: return "spectral";
  }
  return "?";
}

const char* state_name(MirrorKind k) {
  switch (k) {
    case MirrorKind::Thermal: return "thermal";
    case MirrorKind::Coherent: return "coherent";
    case MirrorKind::Fock: return "fock";
  }
  return "?";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

std::string boolean(bool b) { return b ? "true" : "false"; }

std::string join(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ";" : "") + num(values[i]);
  return s;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double parse_number(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("invalid number '") + text + "' for " + what);
  }
}

// Either "lo:hi:count" (log-spaced) or a comma-separated list.
std::vector<double> parse_delta_grid(const std::string& text) {
  const auto range = split(text, ':');
  if (range.size() == 3) {
    const double lo = parse_number(range[0], "--delta-grid");
    const double hi = parse_number(range[1], "--delta-grid");
    const double count = parse_number(range[2], "--delta-grid");
    if (!(lo > 0.0) || !(hi >= lo) || count < 1 || count != std::floor(count)) {
      throw UsageError("--delta-grid lo:hi:count needs 0 < lo <= hi and an integer count >= 1");
    }
    const int n = static_cast<int>(count);
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      grid[static_cast<std::size_t>(i)] =
          n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    }
    return grid;
  }
  std::vector<double> grid;
  for (const auto& item : split(text, ',')) grid.push_back(parse_number(item, "--delta-grid"));
  if (grid.empty()) throw UsageError("--delta-grid is empty");
  return grid;
}

std::vector<std::pair<std::string, std::string>> config_pairs(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> p{
      {"command", command_name(cfg.command)},
      {"omega", num(cfg.omega)},
      {"g0", num(cfg.g0)},
      {"gamma-cav", num(cfg.gamma_cav)},
      {"epsilon", num(cfg.epsilon)},
      {"hz", boolean(cfg.hz)},
      {"state", state_name(cfg.state)},
      {"N", join(cfg.mean_numbers)},
      {"beta", num(cfg.beta)},
      {"n", std::to_string(cfg.fock_n)},
      {"delta", num(cfg.delta)},
      {"delta-grid", cfg.delta_grid.empty() ? "auto" : join(cfg.delta_grid)},
      {"delta-count", std::to_string(cfg.delta_count)},
      {"theta", num(cfg.theta)},
      {"times", cfg.time_points.empty() ? std::to_string(cfg.times) : join(cfg.time_points)},
      {"quadrature", cfg.quadrature == Quadrature::X ? "x" : "y"},
      {"tolerance", num(cfg.tolerance)},
      {"format", cfg.format == OutputFormat::Csv ? "csv" : "json"},
      {"out", cfg.out},
  };
  const ExperimentConfig e = cfg.experiment();
  p.emplace_back("pulse-offset", num(e.pulse_offset));
  p.emplace_back("gamma-eff", num(e.gamma_eff()));
  return p;
}

// One table plus a summary, rendered as CSV (config and summary as '#'
// comment lines) or JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
  std::vector<std::pair<std::string, Json>> summary;
};

std::string csv_cell(const Json& v) {
  if (v.is_boolean()) return boolean(v.get<bool>());
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return num(v.get<double>());
  if (v.is_null()) return "nan";
  return v.get<std::string>();
}

std::string render(const RunConfig& cfg, const Table& table) {
  std::ostringstream s;
  if (cfg.format == OutputFormat::Json) {
    Json doc;
    Json config = Json::object();
    for (const auto& [k, v] : config_pairs(cfg)) config[k] = v;
    doc["config"] = config;
    doc["columns"] = table.columns;
    Json rows = Json::array();
    for (const auto& r : table.rows) {
      Json row = Json::object();
      for (std::size_t i = 0; i < r.size(); ++i) row[table.columns[i]] = r[i];
      rows.push_back(row);
    }
    doc["rows"] = rows;
    Json summary = Json::object();
    for (const auto& [k, v] : table.summary) summary[k] = v;
    doc["summary"] = summary;
    s << doc.dump(2) << '\n';
    return s.str();
  }
  for (const auto& [k, v] : config_pairs(cfg)) s << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) s << (i ? "," : "") << table.columns[i];
  s << '\n';
  for (const auto& r : table.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << csv_cell(r[i]);
    s << '\n';
  }
  for (const auto& [k, v] : table.summary) s << "# summary " << k << '=' << csv_cell(v) << '\n';
  return s.str();
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out == "-" || cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.out, std::ios::binary | std::ios::trunc);
  if (!file) throw UsageError("cannot open output file '" + cfg.out + "'");
  file << text;
  if (!file) throw UsageError("cannot write output file '" + cfg.out + "'");
}

MirrorState mirror_for(const RunConfig& cfg, double mean_number) {
  switch (cfg.state) {
    case MirrorKind::Thermal: return MirrorState::thermal(mean_number);
    case MirrorKind::Coherent: return MirrorState::coherent(mean_number, cfg.beta);
    case MirrorKind::Fock: return MirrorState::fock(cfg.fock_n);
  }
  return {};
}

double single_mean_number(const RunConfig& cfg) {
  if (cfg.mean_numbers.size() != 1) throw UsageError("this command takes exactly one --N value");
  return cfg.mean_numbers.front();
}

int run_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.state == MirrorKind::Fock) throw UsageError("sweep supports thermal and coherent states");
  if (cfg.mean_numbers.empty()) throw UsageError("sweep needs at least one --N value");
  for (double n : cfg.mean_numbers) {
    if (!(n >= 0.0)) throw UsageError("--N values must be >= 0");
  }
  const ExperimentConfig e = cfg.experiment();

  std::vector<std::future<std::vector<AmplificationPoint>>> jobs;
  for (double n : cfg.mean_numbers) {
    jobs.push_back(std::async(std::launch::async, [&cfg, &e, n] {
      const std::vector<double> grid =
          cfg.delta_grid.empty() ? default_delta_grid(e, n, cfg.delta_count) : cfg.delta_grid;
      if (grid.empty()) {
        std::ostringstream msg;
        if (n == 0.0) {
          msg << "N = 0 has no lower delta bound; pass an explicit --delta-grid";
          throw UsageError(msg.str());
        }
        msg << "N = " << n << ": delta_min = 100 gamma sqrt(N) = " << delta_min(e, n)
            << " leaves no room below delta = 0.99";
        throw RegimeViolation(msg.str());
      }
      return amplification_curve(e, n, cfg.state, grid, cfg.theta);
    }));
  }

  Table table;
  table.columns = {"N", "delta", "ps_probability", "f", "regime_ok"};
  bool all_ok = true;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (const auto& p : jobs[i].get()) {
      table.rows.push_back({cfg.mean_numbers[i], p.delta, p.ps_probability, p.f, p.regime_ok});
      all_ok = all_ok && p.regime_ok;
    }
  }
  table.summary = {{"points", static_cast<long long>(table.rows.size())}, {"all_regime_ok", all_ok}};
  emit(cfg, render(cfg, table), out);
  if (!all_ok) err << "warning: some sweep points lie outside the weak-value regime (regime_ok = false)\n";
  return kExitPass;
}

int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const double n = single_mean_number(cfg);
  const ExperimentConfig e = cfg.experiment();
  const PostselectionSpec ps = PostselectionSpec::make(cfg.delta, cfg.theta);
  const std::vector<double> times =
      cfg.time_points.empty() ? period_times(e.omega, cfg.times) : cfg.time_points;
  const VerificationResult r = verify_closed_form(e, mirror_for(cfg, n), ps, times, cfg.quadrature);

  Table table;
  table.columns = {"t", "exact", "analytic", "residual"};
  for (const auto& row : r.rows) table.rows.push_back({row.t, row.exact, row.analytic, row.residual});
  table.summary = {
      {"fitted_amplitude", r.fit.amplitude},
      {"fitted_phase", r.fit.phase},
      {"fitted_offset", r.fit.offset},
      {"analytic_amplitude", r.analytic_amplitude},
      {"analytic_phase", r.analytic_phase},
      {"relative_amplitude_error", r.relative_amplitude_error},
      {"phase_error", r.phase_error},
      {"tolerance", r.tolerance},
      {"max_abs_residual", r.max_abs_residual},
      {"ps_probability", r.ps_probability},
      {"pass", r.pass},
  };
  emit(cfg, render(cfg, table), out);
  if (!r.pass) {
    err << "verify: relative amplitude error " << r.relative_amplitude_error << " (tolerance "
        << r.tolerance << "), phase error " << r.phase_error << " rad (tolerance 0.05)\n";
    return kExitFailure;
  }
  return kExitPass;
}

int run_weak_values(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const PostselectionSpec ps = PostselectionSpec::make(cfg.delta, cfg.theta);
  const SystemSpec sys = build_tri_mode();
  Ket psi = Ket::Zero(3);
  psi(kCarrier) = 1.0;
  const WeakValue w = weak_values(psi, postselection_ket(ps), sys);

  Table table;
  table.columns = {"operator", "re", "im", "modulus", "phase", "anomalous"};
  for (const auto& [name, value] : {std::pair{"Jx", w.jx}, std::pair{"Jy", w.jy}}) {
    table.rows.push_back({name, value.real(), value.imag(), std::abs(value), std::arg(value),
                          std::abs(value) > 1.0});
  }
  table.summary = {{"closed_form_modulus", weak_value_modulus(cfg.delta)}};
  emit(cfg, render(cfg, table), out);
  return kExitPass;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

int run_spectral(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.fock_n < 0) throw UsageError("--n must be >= 0");
  const ExperimentConfig e = cfg.experiment();
  const ReductionReport r = validate_tri_mode_reduction(e, cfg.fock_n, cfg.tolerance);

  Table table;
  table.columns = {"branch", "m", "re", "im", "modulus", "expected", "deviation", "leakage"};
  for (const auto& b : r.branches) {
    table.rows.push_back({b.label, static_cast<long long>(b.m), b.measured.real(), b.measured.imag(),
                          std::abs(b.measured), b.expected.real(), b.deviation, b.leakage});
  }
  table.summary = {
      {"g", r.g},
      {"global_phase", r.global_phase},
      {"total_norm", r.total_norm},
      {"leakage", r.leakage},
      {"max_deviation", r.max_deviation},
      {"l2_full_vs_single", optional_number(r.full_vs_single)},
      {"l2_single_vs_peak", optional_number(r.single_vs_peak)},
      {"l2_full_vs_peak", optional_number(r.full_vs_peak)},
      {"cross_overlap_abs", std::abs(r.cross_overlap)},
      {"cross_overlap_closed_abs", std::abs(r.cross_overlap_closed)},
      {"k_tail_bound", r.tail_bound},
  };
  for (const auto& c : r.regime.conditions()) {
    if (c.name == "weak_value" || c.name == "sweep_domain") continue;
    table.summary.emplace_back("margin_" + c.name, c.margin);
  }
  table.summary.emplace_back("regime_ok", r.regime_ok);
  table.summary.emplace_back("pass", r.pass);
  emit(cfg, render(cfg, table), out);

  if (!r.regime_ok) {
    err << "spectral: regime violation:";
    for (const auto& c : r.regime.conditions()) {
      if (c.name == "weak_value" || c.name == "sweep_domain") continue;
      if (!c.ok) err << ' ' << c.name << " (margin " << c.margin << " < 10)";
    }
    err << '\n';
    return kExitFailure;
  }
  if (!r.pass) {
    err << "spectral: reduction coefficient deviation " << r.max_deviation << " exceeds "
        << r.tolerance << '\n';
    return kExitFailure;
  }
  return kExitPass;
}

}  // namespace

ExperimentConfig RunConfig::experiment() const {
  return ExperimentConfig::with_detuned_carrier(omega, g0, gamma_cav, epsilon);
}

RunConfig parse_run_config(const std::vector<std::string>& args, std::ostream& out,
                           bool* help_shown) {
  if (help_shown) *help_shown = false;
  RunConfig cfg;
  CLI::App app{"Weak-value amplification of mirror quadratures with a single photon", "wvamp"};
  CLI::Option* config_opt =
      app.set_config("--config", "", "Read key=value options from a file ('#' starts a comment)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();
  app.require_subcommand(1, 1);

  std::string state = "thermal";
  std::string delta_grid;
  std::string times;
  std::string quadrature = "x";
  std::string format = "csv";

  app.add_option("--omega", cfg.omega, "Mechanical frequency (rad/s)")->capture_default_str();
  app.add_option("--g0", cfg.g0, "Vacuum optomechanical coupling (rad/s)")->capture_default_str();
  app.add_option("--gamma-cav", cfg.gamma_cav, "Cavity decay rate (rad/s)")->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "Pulse half-width (rad/s)")->capture_default_str();
  app.add_flag("--hz", cfg.hz, "Read --omega, --g0, --gamma-cav and --epsilon in cycles/s");
  app.add_option("--state", state, "Mirror state")
      ->check(CLI::IsMember({"thermal", "coherent", "fock"}))
      ->capture_default_str();
  app.add_option("--N", cfg.mean_numbers, "Mean phonon number(s), comma-separated for sweep")
      ->delimiter(',');
  app.add_option("--beta", cfg.beta, "Coherent-state phase (rad)")->capture_default_str();
  app.add_option("--n", cfg.fock_n, "Mirror Fock index for spectral")->capture_default_str();
  app.add_option("--delta", cfg.delta, "Postselection amplitude delta")->capture_default_str();
  app.add_option("--delta-grid", delta_grid, "Sweep grid: lo:hi:count (log-spaced) or a comma list");
  app.add_option("--delta-count", cfg.delta_count, "Points in the automatic sweep grid")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--theta", cfg.theta, "Postselection phase (rad)")->capture_default_str();
  app.add_option("--times", times, "Samples per period, or a comma list of times in s");
  app.add_option("--quadrature", quadrature, "Quadrature for verify")
      ->check(CLI::IsMember({"x", "y"}))
      ->capture_default_str();
  app.add_option("--tolerance", cfg.tolerance, "Spectral reduction tolerance")->capture_default_str();
  app.add_option("--out", cfg.out, "Output file, '-' for stdout")->capture_default_str();
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Amplification factor and postselection probability over delta");
  auto* verify = app.add_subcommand("verify", "Exact conditional quadrature against the closed form");
  auto* weak = app.add_subcommand("weak-values", "Weak values of Jx and Jy");
  auto* spectral = app.add_subcommand("spectral", "Reduction of the scattered amplitudes to three modes");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, out);
    if (help_shown) *help_shown = true;
    return cfg;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, out);
    if (help_shown) *help_shown = true;
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (sweep->parsed()) cfg.command = Command::Sweep;
  if (verify->parsed()) cfg.command = Command::Verify;
  if (weak->parsed()) cfg.command = Command::WeakValues;
  if (spectral->parsed()) cfg.command = Command::Spectral;

  if (config_opt->count() > 0) cfg.config_file = config_opt->as<std::string>();
  cfg.state = state == "thermal" ? MirrorKind::Thermal
              : state == "coherent" ? MirrorKind::Coherent
                                    : MirrorKind::Fock;
  cfg.quadrature = quadrature == "x" ? Quadrature::X : Quadrature::Y;
  cfg.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
  if (!delta_grid.empty()) cfg.delta_grid = parse_delta_grid(delta_grid);
  if (!times.empty()) {
    const auto parts = split(times, ',');
    if (parts.size() == 1 && times.find_first_not_of("0123456789") == std::string::npos) {
      cfg.times = std::stoi(times);
      if (cfg.times < 4) throw UsageError("--times needs at least 4 samples per period");
    } else {
      for (const auto& p : parts) cfg.time_points.push_back(parse_number(p, "--times"));
      if (cfg.time_points.size() < 4) throw UsageError("--times needs at least 4 time points");
    }
  }
  if (cfg.hz) {
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    cfg.omega *= kTwoPi;
    cfg.g0 *= kTwoPi;
    cfg.gamma_cav *= kTwoPi;
    cfg.epsilon *= kTwoPi;
  }
  for (double v : {cfg.omega, cfg.gamma_cav, cfg.epsilon}) {
    if (!(v > 0.0)) throw UsageError("--omega, --gamma-cav and --epsilon must be positive");
  }
  if (!(cfg.g0 >= 0.0)) throw UsageError("--g0 must be >= 0");
  return cfg;
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  switch (cfg.command) {
    case Command::Sweep: return run_sweep(cfg, out, err);
    case Command::Verify: return run_verify(cfg, out, err);
    case Command::WeakValues: return run_weak_values(cfg, out, err);
    case Command::Spectral: return run_spectral(cfg, out, err);
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    bool help = false;
    const RunConfig cfg = parse_run_config(args, out, &help);
    if (help) return kExitPass;
    return run_command(cfg, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for options.\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RegimeViolation& e) {
    err << "regime violation: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace wvamp
