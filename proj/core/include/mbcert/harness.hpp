#pragma once

/// @file
/// Experiment orchestration behind the `mbcert` command-line tool: flat
/// key=value configuration, least-squares fits, and CSV tables.
///
/// All times in configs and CSV output are dimensionless, in units of 1/B.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mbcert {

enum class ExperimentKind { kWalkSweep, kHeatmap, kExactProtocol, kInequality, kTomography, kCrosscheck };

const char* to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);

/// Invalid configuration; the CLI maps this to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kWalkSweep;
  int N = 8;
  std::vector<int> N_list{8, 16, 24, 32, 40, 48};
  double B = 0.1;
  double J = 1.0;
  /// Evolution time in units of 1/B; empty means "use the walk peak time".
  std::optional<double> tau;
  double window_factor = 1.5;
  double dtau = 0.05;
  std::vector<double> heatmap_fractions{0.1, 0.5, 1.0};
  double walk_validity_ratio = 0.1;
  std::string output_path;
  unsigned threads = 0;

  void validate() const;
};

/// Applies one key=value setting. Unknown keys raise ConfigError.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Reads a flat key=value file ('#' starts a comment).
void load_config_file(ExperimentConfig& cfg, const std::string& path);

struct FitResult {
  double slope;
  double intercept;
  double r_squared;
  std::size_t n_points;
};

/// Ordinary least squares; needs at least three points and distinct x.
FitResult linear_fit(std::span<const std::pair<double, double>> points);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Runs an experiment and returns its table. Engine failures propagate as
/// exceptions; configuration problems as ConfigError.
CsvTable run_experiment(const ExperimentConfig& cfg);

/// Writes a '#' comment line (free-form, e.g. a timestamp), the header and
/// the rows. The body is a pure function of the table.
void write_csv(std::ostream& os, const CsvTable& table, const std::string& comment);

/// Fixed-format number for CSV cells.
std::string format_number(double v);

}  // namespace mbcert
