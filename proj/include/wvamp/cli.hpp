#pragma once

// Command-line front end: sweep, verify, weak-values and spectral.
//
// Exit codes: 0 pass, 1 usage error, 2 regime or tolerance failure.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "wvamp/optomech.hpp"

namespace wvamp {

enum class Command { Sweep, Verify, WeakValues, Spectral };
enum class OutputFormat { Csv, Json };

inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

struct RunConfig {
  Command command = Command::Sweep;
  // Physical parameters in rad/s after --hz has been applied.
  double omega = 1e6;
  double g0 = 5e2;
  double gamma_cav = 1e4;
  double epsilon = 1e2;
  bool hz = false;
  MirrorKind state = MirrorKind::Thermal;
  std::vector<double> mean_numbers{1.0};
  double beta = 0.0;
  Index fock_n = 2;
  double delta = 0.1;
  std::vector<double> delta_grid;  // empty: log grid from delta_min to 0.99
  int delta_count = 200;
  double theta = 0.0;
  int times = 12;  // samples per mechanical period
  std::vector<double> time_points;  // explicit times in s; overrides `times`
  Quadrature quadrature = Quadrature::X;
  double tolerance = 0.05;  // spectral reduction tolerance
  std::string out = "-";
  OutputFormat format = OutputFormat::Csv;
  std::string config_file;

  ExperimentConfig experiment() const;
};

/// Thrown for malformed or inconsistent arguments; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses argv-style arguments (without the program name). Help requests
/// print to `out` and return std::nullopt-like state through `help_shown`.
RunConfig parse_run_config(const std::vector<std::string>& args, std::ostream& out,
                           bool* help_shown = nullptr);

/// Runs one subcommand and returns its exit code. Data goes to cfg.out, or
/// to `out` when that is "-"; diagnostics go to `err`.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parse plus run, with every error mapped to its exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wvamp
