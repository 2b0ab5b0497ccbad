#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "owcl/scorer.hpp"

namespace owcl {

struct EvalRecord {
  Label true_label = Label::open();
  Verdict verdict = Verdict::open();
  double best_score = 0.0;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

/// Share of known-labelled records whose verdict is known(true label).
/// Throws std::invalid_argument without known-labelled records.
double accuracy(std::span<const EvalRecord> records);
/// Mann-Whitney AUC of best_score, known (positive) vs open; ties count 1/2.
double auc(std::span<const EvalRecord> records);
/// Share of open-labelled records given a known verdict.
double fpr(std::span<const EvalRecord> records);

struct TaskMetrics {
  std::optional<double> acc;
  std::optional<double> auc;
  std::optional<double> fpr;
  std::size_t known_count = 0;
  std::size_t open_count = 0;
};

/// Metrics of one run: per-task values, their average (the headline
/// numbers) and the same metrics pooled over every task's records.
struct MetricsReport {
  std::vector<TaskMetrics> per_task;
  std::optional<double> acc;
  std::optional<double> auc;
  std::optional<double> fpr;
  TaskMetrics pooled;
};

TaskMetrics task_metrics(std::span<const EvalRecord> records);
MetricsReport build_report(const std::vector<std::vector<EvalRecord>>& per_task_records);

struct Summary {
  double mean = 0.0;
  std::optional<double> std;  // absent for a single value
};

/// Mean and (n-1) standard deviation; throws on an empty list.
Summary summarize(std::span<const double> values);

struct AggregateRow {
  std::string metric;  // acc | auc | fpr
  std::string task;    // task index, "avg" or "pooled"
  std::optional<Summary> value;
};

/// Seed aggregation of per-seed reports, one row per metric and task.
std::vector<AggregateRow> aggregate(std::span<const MetricsReport> reports);

/// `metric,task,mean,std` lines; a missing std is written as NA.
std::string format_report_csv(const std::vector<AggregateRow>& rows);
/// JSON document with the aggregate rows and every per-seed report.
std::string format_report_json(const std::vector<AggregateRow>& rows, std::span<const MetricsReport> reports);

/// Per-task evaluation records: header `#owcl-eval v1 task=<t>`, rows
/// `true_label,verdict,best_score` with verdict a class id or UN.
void write_eval_records(const std::vector<EvalRecord>& records, std::int64_t task,
                        const std::filesystem::path& path);
std::vector<EvalRecord> read_eval_records(const std::filesystem::path& path);

}  // namespace owcl
