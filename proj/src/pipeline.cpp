#include "owcl/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>

#include "owcl/rng.hpp"

namespace owcl {

namespace fs = std::filesystem;

namespace {

std::vector<Label> labels_of(std::span<const EmbeddingRecord> records) {
  std::vector<Label> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

// "prefix<number>suffix" -> number
std::optional<std::uint64_t> numbered(const std::string& name, const std::regex& re) {
  std::smatch m;
  if (!std::regex_match(name, m, re)) return std::nullopt;
  return std::stoull(m[1].str());
}

}  // namespace

std::vector<TaskDataset> load_stream(const RunConfig& config, std::uint64_t seed) {
  if (!config.dataset.empty()) return load_tasks(config.dataset);
  ScenarioConfig sc = config.scenario;
  sc.seed = seed;
  return generate(validated(sc)).tasks;
}

KnowledgeState initial_state(const RunConfig& config, std::size_t input_dim, std::uint64_t seed) {
  auto projection = init_projection(input_dim, config.projection_dim, derive_seed(config.nrp_seed, seed),
                                    config.sigma_w, config.nonlinearity);
  return KnowledgeState(std::move(projection), config.ridge_auto ? 1.0 : config.ridge_lambda);
}

TrainOutcome train_task(KnowledgeState& state, const TaskDataset& task, std::size_t task_index,
                        const RunConfig& config, std::uint64_t seed) {
  if (task.train.empty()) throw DimensionError("task " + std::to_string(task.task_id) + " has no training samples");
  const RowMatrix raw = stack_vectors(task.train, task.dimension);
  const RowMatrix h = project(raw, state.projection());
  const auto labels = labels_of(task.train);

  if (config.ridge_auto) state.set_ridge_lambda(select_ridge_lambda(state, h, labels));
  state.update_gram_and_aggregates(h, labels);
  state.update_delta(h, labels);

  const RowMatrix weights = state.decode_weights();
  state.set_train_score_mean(state.mean_training_score(weights));

  const RowMatrix scores = score_rows(h, weights);
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    state.score_reservoir().record(scores.row(i).maxCoeff() / state.train_score_mean());

  TrainOutcome out;
  out.ridge_lambda = state.ridge_lambda();
  if (config.mode == RunMode::full && state.num_classes() >= 2) {
    DapConfig dap = config.dap;
    dap.seed = derive_seed(derive_seed(seed, kCalibrationStream), task_index);
    const CalibrationSet calib = build_calibration_set(state, dap);
    out.calibration = calibrate(state, calib, weights, config.epsilon, config.max_iters);
  }
  return out;
}

double evaluation_cutoff(const KnowledgeState& state, const RunConfig& config) {
  if (config.mode == RunMode::full && state.calibrated()) return calibrated_cutoff(state);
  return percentile_cutoff(state, config.ablation_percentile);
}

std::vector<EvalRecord> evaluate_task(const KnowledgeState& state, const TaskDataset& task,
                                      const RunConfig& config) {
  std::vector<EvalRecord> out;
  if (task.test.empty()) return out;
  const RowMatrix weights = state.decode_weights();
  const double cutoff = evaluation_cutoff(state, config);
  const auto scored = classify_batch(stack_vectors(task.test, task.dimension), state, weights, cutoff);
  out.reserve(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i)
    out.push_back({task.test[i].label, scored[i].verdict, scored[i].best_score});
  return out;
}

fs::path seed_dir(const fs::path& out, std::uint64_t seed) { return out / ("seed_" + std::to_string(seed)); }
fs::path eval_file(const fs::path& dir, std::size_t k) { return dir / ("eval_t" + std::to_string(k) + ".csv"); }
fs::path state_file(const fs::path& dir, std::size_t k) { return dir / ("state_t" + std::to_string(k) + ".bin"); }

std::vector<std::vector<EvalRecord>> run_seed(const RunConfig& config, std::uint64_t seed, const fs::path& directory,
                                              std::optional<ResumePoint> resume) {
  const auto tasks = load_stream(config, seed);
  if (tasks.empty()) throw ConfigError("no tasks");
  fs::create_directories(directory);

  std::size_t start = 0;
  std::optional<KnowledgeState> state;
  if (resume) {
    start = resume->start_task;
    if (start > tasks.size()) throw ConfigError("start task beyond the last task");
    state.emplace(std::move(resume->state));
    if (state->projection().input_dim() != tasks.front().dimension)
      throw DimensionError("resumed state expects dimension " + std::to_string(state->projection().input_dim()));
  } else {
    state.emplace(initial_state(config, tasks.front().dimension, seed));
  }

  std::vector<std::vector<EvalRecord>> records;
  for (std::size_t k = start; k < tasks.size(); ++k) {
    const std::string where = "seed " + std::to_string(seed) + " task " + std::to_string(k) + ": ";
    try {
      train_task(*state, tasks[k], k, config, seed);
      if (config.save_states) save_state(*state, state_file(directory, k));
      records.push_back(evaluate_task(*state, tasks[k], config));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    } catch (const Error& e) {
      throw std::runtime_error(where + e.what());
    }
    write_eval_records(records.back(), static_cast<std::int64_t>(k), eval_file(directory, k));
  }
  return records;
}

std::vector<MetricsReport> write_reports(const fs::path& out) {
  static const std::regex seed_re("seed_([0-9]+)");
  static const std::regex eval_re("eval_t([0-9]+)\\.csv");
  std::map<std::uint64_t, fs::path> seeds;
  if (fs::is_directory(out))
    for (const auto& e : fs::directory_iterator(out))
      if (e.is_directory())
        if (auto s = numbered(e.path().filename().string(), seed_re)) seeds[*s] = e.path();
  if (seeds.empty()) throw IoError("no seed_<s> directories under " + out.string());

  std::vector<MetricsReport> reports;
  for (const auto& [seed, dir] : seeds) {
    std::map<std::uint64_t, fs::path> evals;
    for (const auto& e : fs::directory_iterator(dir))
      if (auto k = numbered(e.path().filename().string(), eval_re)) evals[*k] = e.path();
    if (evals.empty()) throw IoError("no eval files in " + dir.string());
    std::vector<std::vector<EvalRecord>> per_task;
    std::uint64_t expect = 0;
    for (const auto& [k, path] : evals) {
      if (k != expect++) throw IoError("missing eval file for task " + std::to_string(expect - 1) + " in " + dir.string());
      per_task.push_back(read_eval_records(path));
    }
    reports.push_back(build_report(per_task));
  }
  const auto rows = aggregate(reports);
  write_text(out / "report.csv", format_report_csv(rows));
  write_text(out / "report.json", format_report_json(rows, reports));
  return reports;
}

std::vector<MetricsReport> run_experiment(const RunConfig& config) {
  validate(config);
  const fs::path out = config.output_dir.empty() ? default_output_dir() : config.output_dir;
  fs::create_directories(out);
  for (const auto seed : config.seeds) run_seed(config, seed, seed_dir(out, seed));
  write_text(out / "config.txt", format_config(config));
  return write_reports(out);
}

}  // namespace owcl
