// owcl: simulate -> train -> eval -> report, or all of it with `run`.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "owcl/pipeline.hpp"

namespace fs = std::filesystem;
using namespace owcl;

namespace {

std::string flag_name(std::string key) {
  for (auto& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

// Config-key flags shared by the subcommands. Values are applied after the
// config file, in key-table order.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    static const RunConfig defaults = [] {
      RunConfig c;
      c.output_dir = default_output_dir();
      return c;
    }();
    app->add_option("-c,--config", config_file, "key=value config file (flags override it)")
        ->check(CLI::ExistingFile);
    for (const auto& key : config_keys()) {
      auto* opt = app->add_option(flag_name(key.name), values[key.name], key.help);
      opt->default_str(key.get(defaults));
      opt->group("Config keys");
    }
  }

  RunConfig resolve(CLI::App* app) const {
    RunConfig config;
    config.output_dir = default_output_dir();
    if (!config_file.empty()) config = load_config_file(config_file, config);
    for (const auto& key : config_keys())
      if (app->count(flag_name(key.name)) > 0) apply_setting(config, key.name, values.at(key.name));
    return config;
  }
};

int run_cmd(const RunConfig& config) {
  const auto reports = run_experiment(config);
  const fs::path out = config.output_dir;
  std::cout << "wrote " << (out / "report.csv").string() << " (" << reports.size() << " seed"
            << (reports.size() == 1 ? "" : "s") << ")\n";
  std::cout << format_report_csv(aggregate(reports));
  return 0;
}

int simulate_cmd(const RunConfig& config, const fs::path& out, std::uint64_t seed) {
  validate(config);
  if (!config.dataset.empty()) throw ConfigError("simulate does not take a dataset");
  ScenarioConfig sc = config.scenario;
  sc.seed = seed;
  const auto stream = generate(validated(sc));
  export_stream(stream, out);
  std::cout << "wrote " << stream.tasks.size() << " tasks to " << out.string() << "\n";
  return 0;
}

int train_cmd(const RunConfig& config, const fs::path& out, std::uint64_t seed, const std::string& resume,
              std::size_t start_task) {
  validate(config);
  const auto tasks = load_stream(config, seed);
  if (tasks.empty()) throw ConfigError("no tasks");
  if (resume.empty() && start_task != 0) throw ConfigError("--start-task needs --resume");
  KnowledgeState state = resume.empty() ? initial_state(config, tasks.front().dimension, seed) : load_state(resume);
  if (start_task > tasks.size()) throw ConfigError("start task beyond the last task");
  fs::create_directories(out);
  for (std::size_t k = start_task; k < tasks.size(); ++k) {
    try {
      train_task(state, tasks[k], k, config, seed);
    } catch (const Error& e) {
      throw std::runtime_error("seed " + std::to_string(seed) + " task " + std::to_string(k) + ": " + e.what());
    }
    save_state(state, state_file(out, k));
  }
  std::cout << "trained tasks " << start_task << ".." << tasks.size() - 1 << ", states in " << out.string() << "\n";
  return 0;
}

int eval_cmd(const RunConfig& config, const fs::path& state_path, const fs::path& task_path, std::size_t task_index,
             const fs::path& out) {
  const KnowledgeState state = load_state(state_path);
  const TaskDataset task = read_dataset(task_path);
  const auto records = evaluate_task(state, task, config);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_eval_records(records, static_cast<std::int64_t>(task_index), out);
  const auto m = task_metrics(records);
  auto show = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  std::cout << "acc=" << show(m.acc) << " auc=" << show(m.auc) << " fpr=" << show(m.fpr) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-world continual learning with frozen random projections"};
  app.require_subcommand(1);

  ConfigFlags run_flags, sim_flags, train_flags, eval_flags;

  auto* run = app.add_subcommand("run", "simulate (or load), train, evaluate and report every seed");
  run_flags.attach(run);

  auto* simulate = app.add_subcommand("simulate", "write one simulated stream as task files plus manifest");
  sim_flags.attach(simulate);
  fs::path sim_out;
  std::uint64_t sim_seed = 0;
  simulate->add_option("-o,--out", sim_out, "target directory")->required();
  simulate->add_option("--seed", sim_seed, "stream seed")->capture_default_str();

  auto* train = app.add_subcommand("train", "train over the tasks, saving state_t<k>.bin after each");
  train_flags.attach(train);
  fs::path train_out;
  std::uint64_t train_seed = 0;
  std::string resume;
  std::size_t start_task = 0;
  train->add_option("-o,--out", train_out, "directory for state files")->required();
  train->add_option("--seed", train_seed, "run seed")->capture_default_str();
  train->add_option("--resume", resume, "state file to continue from")->check(CLI::ExistingFile);
  train->add_option("--start-task", start_task, "first task to train when resuming")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "score one task's test split with a saved state");
  eval_flags.attach(eval);
  fs::path eval_state, eval_task, eval_out;
  std::size_t eval_index = 0;
  eval->add_option("--state", eval_state, "state file")->required()->check(CLI::ExistingFile);
  eval->add_option("--task-file", eval_task, "#owcl v1 task file")->required()->check(CLI::ExistingFile);
  eval->add_option("--task-index", eval_index, "task position written to the header")->capture_default_str();
  eval->add_option("-o,--out", eval_out, "eval record file")->required();

  auto* report = app.add_subcommand("report", "aggregate seed_<s>/eval_t<k>.csv into report.csv and report.json");
  fs::path report_dir;
  report->add_option("-d,--dir", report_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return run_cmd(run_flags.resolve(run));
    if (*simulate) return simulate_cmd(sim_flags.resolve(simulate), sim_out, sim_seed);
    if (*train) return train_cmd(train_flags.resolve(train), train_out, train_seed, resume, start_task);
    if (*eval) return eval_cmd(eval_flags.resolve(eval), eval_state, eval_task, eval_index, eval_out);
    if (*report) {
      const auto reports = write_reports(report_dir);
      std::cout << format_report_csv(aggregate(reports));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
