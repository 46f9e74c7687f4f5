#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stargraph/coupling.hpp"
#include "stargraph/potential.hpp"

namespace stargraph::lab {

struct ScalingSpec {
  bool resonant = true;
  double lambda0 = 0.0;  // ignored when resonant (lambda0 = 1/A)
  double lambda1 = -1.0;
  std::vector<double> higher;
};

struct OracleSpec {
  double L = 40.0;
  double h = 5e-3;
  double scattering_L = 2.0;
  double epsilon = 0.05;
  double scattering_epsilon = 0.1;
  double k = 1.0;
  double column_kappa = 1.0;
  EdgeCoordinate source{0, 0.7};
};

struct Tolerances {
  double eigenvalue = 1e-2;
  double smatrix = 1e-3;
  double column = 5e-4;
  double column_eps = 1e-3;
  double richardson = 0.25;
};

struct ExperimentConfig {
  int n = 0;
  StarPotential potential{{EdgeProfile(), EdgeProfile()}};
  ScalingSpec scaling;
  std::vector<double> epsilons;
  std::vector<double> momenta;
  double kappa = 1.0;
  int quad_order = 32;
  OracleSpec oracle;
  Tolerances tolerances;
  std::string output_dir = "out";

  ScalingFunction scaling_function() const;
};

/// Strict parse: unknown keys, wrong types and out-of-range values raise ConfigError;
/// the potential is validated (support, zero mean) before returning.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Reference potential V* (n = 3, edges +1, -1, 0 on [0, 1]) with the given lambda1.
nlohmann::json reference_config(double lambda1);

/// Built-in bundle run when no --config is given: V* with lambda1 = -1 and +1.
std::vector<std::pair<std::string, nlohmann::json>> default_bundle();

struct RateFit {
  std::string quantity;
  std::vector<std::pair<double, double>> points;  // (epsilon, error)
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log(error) on log(epsilon). ConfigError for fewer than four points;
/// nullopt when some error is not positive.
std::optional<RateFit> fit_rate(std::string quantity, std::vector<std::pair<double, double>> points);

struct Report {
  std::string command;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  nlohmann::json summary;
  bool passed = true;
};

struct RunOptions {
  int parallel = 1;
};

Report cmd_constants(const ExperimentConfig& cfg);
Report cmd_spectrum(const ExperimentConfig& cfg, const RunOptions& opts = {});
Report cmd_converge(const ExperimentConfig& cfg, const RunOptions& opts = {});
Report cmd_oracle(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Writes <dir>/<command>.csv and <dir>/<command>.json.
void write_report(const Report& report, const std::filesystem::path& dir);

/// %.17g, or the empty string for nullopt.
std::string format_number(std::optional<double> x);

/// Flag, then STARGRAPH_OUT_DIR, then the config's output.dir.
std::filesystem::path resolve_output_dir(const std::optional<std::string>& flag,
                                         const ExperimentConfig& cfg);

/// 2 validation, 3 numerical, 4 tolerance.
int exit_code(const Error& err) noexcept;

}  // namespace stargraph::lab
