#include "owcl/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "owcl/embedding_io.hpp"

namespace owcl {

std::string to_string(RunMode mode) { return mode == RunMode::full ? "full" : "ablation_no_dap"; }

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("bad value '" + value + "' for " + key);
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) throw ConfigError("non-finite value for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean '" + value + "' for " + key);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
ConfigKey number_key(std::string name, std::string help, T RunConfig::*field) {
  return {name, std::move(help),
          [name, field](RunConfig& c, const std::string& v) { c.*field = parse_number<T>(name, v); },
          [field](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return format_double(c.*field);
            else
              return std::to_string(c.*field);
          }};
}

template <typename T>
ConfigKey scenario_key(std::string name, std::string help, T ScenarioConfig::*field) {
  return {name, std::move(help),
          [name, field](RunConfig& c, const std::string& v) { c.scenario.*field = parse_number<T>(name, v); },
          [field](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return format_double(c.scenario.*field);
            else
              return std::to_string(c.scenario.*field);
          }};
}

template <typename T>
ConfigKey dap_key(std::string name, std::string help, T DapConfig::*field) {
  return {name, std::move(help),
          [name, field](RunConfig& c, const std::string& v) { c.dap.*field = parse_number<T>(name, v); },
          [field](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return format_double(c.dap.*field);
            else
              return std::to_string(c.dap.*field);
          }};
}

std::vector<ConfigKey> build_keys() {
  std::vector<ConfigKey> k;
  k.push_back({"scenario", "simulated stream type: CINO, CIRO, KINO or KIRO (resets the scenario preset)",
               [](RunConfig& c, const std::string& v) {
                 // Keep the shape knobs already set; only the scenario-specific defaults change.
                 ScenarioConfig next = ScenarioConfig::preset(parse_scenario(v));
                 ScenarioConfig& cur = c.scenario;
                 next.dimension = cur.dimension;
                 next.num_tasks = cur.num_tasks;
                 next.classes_per_task = cur.classes_per_task;
                 next.train_per_class = cur.train_per_class;
                 next.test_per_class = cur.test_per_class;
                 next.class_separation = cur.class_separation;
                 next.within_class_sigma = cur.within_class_sigma;
                 next.num_open_classes = open_samples_recur(next.scenario) ? cur.num_open_classes
                                                                           : std::max(cur.num_open_classes, cur.num_tasks);
                 cur = next;
               },
               [](const RunConfig& c) { return to_string(c.scenario.scenario); }});
  k.push_back({"dataset", "manifest of external task files; when set no stream is simulated",
               [](RunConfig& c, const std::string& v) { c.dataset = v; },
               [](const RunConfig& c) { return c.dataset.generic_string(); }});
  k.push_back(scenario_key("dim", "simulated embedding dimension d", &ScenarioConfig::dimension));
  k.push_back(scenario_key("tasks", "number of simulated tasks", &ScenarioConfig::num_tasks));
  k.push_back(scenario_key("classes_per_task", "classes trained per task", &ScenarioConfig::classes_per_task));
  k.push_back(scenario_key("train_per_class", "training samples per class per task", &ScenarioConfig::train_per_class));
  k.push_back(scenario_key("test_per_class", "test samples per class (and open samples) per task",
                           &ScenarioConfig::test_per_class));
  k.push_back(scenario_key("open_classes", "number of open classes", &ScenarioConfig::num_open_classes));
  k.push_back(scenario_key("separation", "class mean spacing in units of sigma", &ScenarioConfig::class_separation));
  k.push_back(scenario_key("sigma", "within-class standard deviation", &ScenarioConfig::within_class_sigma));
  k.push_back(scenario_key("drift", "mean shift of a recurring class, units of sigma", &ScenarioConfig::drift_magnitude));
  k.push_back(scenario_key("recurrence", "share of a task's classes that recur (KINO/KIRO)",
                           &ScenarioConfig::recurrence_rate));
  k.push_back(number_key("proj_dim", "random projection size M", &RunConfig::projection_dim));
  k.push_back(number_key("nrp_seed", "projection seed (combined with each run seed)", &RunConfig::nrp_seed));
  k.push_back(number_key("sigma_w", "standard deviation of projection entries", &RunConfig::sigma_w));
  k.push_back({"nonlinearity", "relu or identity", [](RunConfig& c, const std::string& v) {
                 c.nonlinearity = parse_nonlinearity(v);
               },
               [](const RunConfig& c) { return to_string(c.nonlinearity); }});
  k.push_back({"lambda", "ridge parameter, or 'auto' to pick from 1e-4..1e4 on a held-out quarter of each task",
               [](RunConfig& c, const std::string& v) {
                 if (v == "auto") {
                   c.ridge_auto = true;
                 } else {
                   c.ridge_auto = false;
                   c.ridge_lambda = parse_number<double>("lambda", v);
                 }
               },
               [](const RunConfig& c) { return c.ridge_auto ? std::string("auto") : format_double(c.ridge_lambda); }});
  k.push_back(dap_key("dap_positives", "positive pseudo-samples per class", &DapConfig::positives_per_class));
  k.push_back(dap_key("dap_negatives", "negative pseudo-samples per prototype pair", &DapConfig::negatives_per_pair));
  k.push_back(dap_key("zeta_lo", "lower bound of the pseudo-prototype mixing weight", &DapConfig::zeta_lo));
  k.push_back(dap_key("zeta_hi", "upper bound of the pseudo-prototype mixing weight", &DapConfig::zeta_hi));
  k.push_back(dap_key("max_pairs", "cap on prototype pairs (closest first)", &DapConfig::max_pairs));
  k.push_back(number_key("epsilon", "ternary search termination width", &RunConfig::epsilon));
  k.push_back(number_key("max_iters", "ternary search iteration cap", &RunConfig::max_iters));
  k.push_back({"seeds", "comma-separated run seeds",
               [](RunConfig& c, const std::string& v) {
                 c.seeds.clear();
                 std::stringstream ss(v);
                 std::string tok;
                 while (std::getline(ss, tok, ',')) c.seeds.push_back(parse_number<std::uint64_t>("seeds", trim(tok)));
               },
               [](const RunConfig& c) {
                 std::string out;
                 for (std::size_t i = 0; i < c.seeds.size(); ++i) out += (i ? "," : "") + std::to_string(c.seeds[i]);
                 return out;
               }});
  k.push_back({"output", "output directory (default $OWCL_OUTPUT_DIR or owcl-out)",
               [](RunConfig& c, const std::string& v) { c.output_dir = v; },
               [](const RunConfig& c) { return c.output_dir.generic_string(); }});
  k.push_back({"mode", "full or ablation_no_dap",
               [](RunConfig& c, const std::string& v) {
                 if (v == "full")
                   c.mode = RunMode::full;
                 else if (v == "ablation_no_dap")
                   c.mode = RunMode::ablation_no_dap;
                 else
                   throw ConfigError("unknown mode '" + v + "'");
               },
               [](const RunConfig& c) { return to_string(c.mode); }});
  k.push_back(number_key("ablation_percentile", "training best-score quantile used as cutoff without DAPs",
                         &RunConfig::ablation_percentile));
  k.push_back({"save_states", "write the model state after every task",
               [](RunConfig& c, const std::string& v) { c.save_states = parse_bool("save_states", v); },
               [](const RunConfig& c) { return std::string(c.save_states ? "true" : "false"); }});
  return k;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : config_keys())
    if (k.name == key) return k.set(config, value);
  throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), std::move(base));
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : config_keys()) {
    // Shape keys follow the scenario so a re-parse does not reset them.
    out += k.name + "=" + k.get(config) + "\n";
  }
  return out;
}

void validate(const RunConfig& c) {
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  if (c.projection_dim < 1) throw ConfigError("proj_dim must be >= 1");
  if (!(c.sigma_w > 0.0)) throw ConfigError("sigma_w must be positive");
  if (!c.ridge_auto && !(c.ridge_lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(c.dap.zeta_lo > 0.0) || !(c.dap.zeta_lo <= c.dap.zeta_hi)) throw ConfigError("need 0 < zeta_lo <= zeta_hi");
  if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (c.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(c.ablation_percentile >= 0.0 && c.ablation_percentile <= 1.0))
    throw ConfigError("ablation_percentile must lie in [0, 1]");
  if (!c.dataset.empty()) {
    if (!std::filesystem::exists(c.dataset)) throw ConfigError("dataset manifest " + c.dataset.string() + " not found");
  } else {
    validated(c.scenario);
  }
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("OWCL_OUTPUT_DIR"); env && *env) return env;
  return "owcl-out";
}

}  // namespace owcl
