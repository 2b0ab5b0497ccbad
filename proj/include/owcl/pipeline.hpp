#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "owcl/metrics.hpp"
#include "owcl/run_config.hpp"
#include "owcl/threshold.hpp"

namespace owcl {

/// Seed-stream tags mixed into derive_seed.
constexpr std::uint64_t kProjectionStream = 0x6e7270;   // "nrp"
constexpr std::uint64_t kCalibrationStream = 0x646170;  // "dap"

/// Tasks of one run: the simulated stream for `seed`, or the external
/// dataset named by config.dataset (same for every seed).
std::vector<TaskDataset> load_stream(const RunConfig& config, std::uint64_t seed);

/// Empty state with the run's projection for inputs of `input_dim`.
KnowledgeState initial_state(const RunConfig& config, std::size_t input_dim, std::uint64_t seed);

struct TrainOutcome {
  std::optional<SearchResult> calibration;  // absent in ablation mode or with < 2 classes
  double ridge_lambda = 0.0;
};

/// One incremental step on task `task_index` of run `seed`: project, update
/// G, C and delta, refresh the mean training score and, in full mode,
/// recalibrate r on freshly generated pseudo-samples.
TrainOutcome train_task(KnowledgeState& state, const TaskDataset& task, std::size_t task_index,
                        const RunConfig& config, std::uint64_t seed);

/// Cutoff used at evaluation: the calibrated one in full mode, the training
/// best-score percentile in ablation mode or before the first calibration.
double evaluation_cutoff(const KnowledgeState& state, const RunConfig& config);

std::vector<EvalRecord> evaluate_task(const KnowledgeState& state, const TaskDataset& task,
                                      const RunConfig& config);

std::filesystem::path seed_dir(const std::filesystem::path& out, std::uint64_t seed);
std::filesystem::path eval_file(const std::filesystem::path& seed_directory, std::size_t task_index);
std::filesystem::path state_file(const std::filesystem::path& seed_directory, std::size_t task_index);

struct ResumePoint {
  KnowledgeState state;
  std::size_t start_task = 0;  // first task still to train
};

/// Trains and evaluates every task of one seed, writing eval_t<k>.csv (and
/// state_t<k>.bin when save_states) under `directory`. With `resume` the
/// tasks before resume->start_task are skipped. Returns the records of the
/// tasks it ran.
std::vector<std::vector<EvalRecord>> run_seed(const RunConfig& config, std::uint64_t seed,
                                              const std::filesystem::path& directory,
                                              std::optional<ResumePoint> resume = std::nullopt);

/// Reads every seed_<s>/eval_t<k>.csv under `out` (seeds and tasks in
/// numeric order) and writes report.csv and report.json there.
std::vector<MetricsReport> write_reports(const std::filesystem::path& out);

/// All seeds, then the reports.
std::vector<MetricsReport> run_experiment(const RunConfig& config);

}  // namespace owcl
