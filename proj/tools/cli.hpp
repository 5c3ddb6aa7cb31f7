#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "metamat/recipe.hpp"
#include "metamat/report_io.hpp"

namespace metamat::cli {

// Stable process exit codes.
enum ExitCode : int { kSuccess = 0, kUsage = 1, kNoConvergence = 2, kSolverFailure = 3 };

struct RunConfig {
  std::string subcommand;

  std::string preset;
  std::string n2;
  std::string n0sq = "1";
  std::string smoothness = "twice-differentiable";
  int b = 5;

  double k = 1.0;
  double kappa = 0.99;
  int P = 11;
  std::optional<double> gamma;
  double eps = 0.5;
  std::array<double, 3> alpha{1.0, 0.0, 0.0};

  ErrorMode mode = ErrorMode::MaxOverCenters;
  int m_max = 64;

  int table = 1;
  int m = 1;
  std::vector<int> m_list{1, 2, 3, 4};
  int fine_m = 9;

  std::string out;
  std::string format = "csv";
  std::int64_t dense_cutoff = 4096;
  double tol = 1e-10;
  int subcells = 1;
  int threads = 0;  // 0 leaves the OpenMP default
};

DesignParams make_params(const RunConfig& config);

// Parameter echo for a run: all numeric inputs plus mode and coefficient sources.
ParamEcho run_echo(const RunConfig& config, const DesignParams& params);

int cmd_design(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_table(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_convergence(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses arguments (argv without the program name), applies an optional
/// --config file of key=value lines (command-line flags take precedence) and
/// dispatches.  Returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metamat::cli
