#pragma once

// Command-line front end: roots | sphere | flow | verify, driven by a single
// JSON configuration file.

#include "weylflow/flow.hpp"
#include "weylflow/rootsys.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace weylflow::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kCheckFailure = 2, kNotConverged = 3 };

struct SphereOptions {
  std::optional<double> radius;
  std::optional<double> radius_fraction;  // of the natural radius
  int n_samples = 10000;
  int grid = 256;
};

struct VerifyOptions {
  int eta_samples = 10000;
  int theta0_grid = 4096;
  std::vector<double> monotone_fractions;  // of the natural radius; empty disables
  int residual_window = 0;                 // 0 disables
  std::optional<double> b_window_tolerance;
};

struct RunConfig {
  nlohmann::json raw;
  std::string hash;
  WeightedRootSystem system;
  std::optional<FlowConfig> flow;
  SphereOptions sphere;
  VerifyOptions verify;
};

/// Validates the whole document before anything is computed. Throws
/// std::invalid_argument naming the offending field path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

int cmd_roots(const RunConfig& cfg, const std::optional<std::filesystem::path>& out, std::ostream& log);
int cmd_sphere(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_flow(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_verify(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Full command line including the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace weylflow::cli
