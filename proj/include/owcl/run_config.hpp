#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "owcl/dap.hpp"
#include "owcl/nrp.hpp"
#include "owcl/scenario.hpp"

namespace owcl {

enum class RunMode { full, ablation_no_dap };

std::string to_string(RunMode mode);

/// Every knob of an end-to-end run. Text form is flat `key=value`, see
/// config_keys() for names and defaults.
struct RunConfig {
  ScenarioConfig scenario = ScenarioConfig::preset(Scenario::CIRO);
  std::filesystem::path dataset;  // manifest of external task files; empty = simulate

  std::size_t projection_dim = 2500;
  std::uint64_t nrp_seed = 0;
  double sigma_w = 1.0;
  Nonlinearity nonlinearity = Nonlinearity::relu;

  double ridge_lambda = 1.0;  // used when ridge_auto is off
  bool ridge_auto = true;  // per-task choice from ridge_lambda_grid()

  DapConfig dap;  // dap.seed is derived per run seed and task
  double epsilon = 1e-3;
  std::size_t max_iters = 200;

  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output_dir;
  RunMode mode = RunMode::full;
  double ablation_percentile = 0.05;
  bool save_states = false;
};

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

/// All recognised keys, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Applies one key=value; throws ConfigError on unknown keys or bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
/// Parses a key=value file (`#` comments, blank lines allowed) over `base`.
RunConfig parse_config_text(const std::string& text, RunConfig base = {});
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});
/// Canonical key=value rendering; parse_config_text(format_config(c)) == c.
std::string format_config(const RunConfig& config);

/// Cross-field checks (paths exist, seeds non-empty, ranges). Throws ConfigError.
void validate(const RunConfig& config);

/// Default output directory: $OWCL_OUTPUT_DIR, else "owcl-out".
std::filesystem::path default_output_dir();

}  // namespace owcl
