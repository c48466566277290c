#pragma once

#include "fracspace/error.hpp"
#include "fracspace/k_functional.hpp"
#include "fracspace/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fracspace {

struct RunConfig {
  std::string experiment;
  std::vector<int> sizes;      // empty: experiment default
  std::vector<double> thetas;  // empty: experiment default
  std::uint64_t seed = 42;
  QuadratureRule quadrature;
  std::filesystem::path output_dir = ".";
  std::string format = "both";  // csv | json | both
};

/// Reads a config object. Quadrature keys may sit at top level or under
/// "quadrature": log_t_min, log_t_max, tol, max_panels.
/// Throws InvalidConfig, UnknownExperiment.
RunConfig parse_config(const json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Applies FRACSPACE_SEED when set. Call before flag overrides.
void apply_environment(RunConfig& config);

/// Effective configuration with defaults filled in; output_dir and format
/// are left out since they do not change results.
json canonical_config(const RunConfig& config);
/// 16 hex digits of FNV-1a 64 over canonical_config(config).dump().
std::string config_hash(const RunConfig& config);

struct ExperimentInfo {
  std::string name;
  std::string doc;
};
const std::vector<ExperimentInfo>& list_experiments();

/// Runs the experiment without writing anything.
VerificationReport execute(const RunConfig& config);

struct RunResult {
  VerificationReport report;
  std::vector<std::filesystem::path> files;
};
/// execute() plus `<experiment>-<hash>.csv/.json` under output_dir.
RunResult run(const RunConfig& config);

/// 0 all cells pass, 1 verification failure.
int exit_status(const VerificationReport& report);
/// 2 for usage and configuration errors, 1 for everything else.
int exit_status(const Error& error);
json error_json(const Error& error);

}  // namespace fracspace
