#include "owcl/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include "json.hpp"
#include <sstream>

#include "owcl/embedding_io.hpp"

namespace owcl {

double accuracy(std::span<const EvalRecord> records) {
  std::size_t total = 0, correct = 0;
  for (const auto& r : records) {
    if (r.true_label.is_open()) continue;
    ++total;
    if (!r.verdict.is_open() && r.verdict.known_class() == r.true_label.id()) ++correct;
  }
  if (total == 0) throw std::invalid_argument("accuracy needs known-labelled records");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double auc(std::span<const EvalRecord> records) {
  // Rank-sum form of the pairwise count: sort all scores, give tied groups
  // their average rank, then U = rank_sum(known) - n_k (n_k + 1) / 2.
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(records.size());
  for (const auto& r : records) scored.emplace_back(r.best_score, !r.true_label.is_open());
  const auto n_known = static_cast<double>(std::count_if(scored.begin(), scored.end(), [](auto& p) { return p.second; }));
  const auto n_open = static_cast<double>(scored.size()) - n_known;
  if (n_known == 0 || n_open == 0) throw std::invalid_argument("auc needs known and open records");
  std::sort(scored.begin(), scored.end(), [](auto& a, auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < scored.size();) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (scored[k].second) rank_sum += avg_rank;
    i = j;
  }
  return (rank_sum - n_known * (n_known + 1.0) / 2.0) / (n_known * n_open);
}

double fpr(std::span<const EvalRecord> records) {
  std::size_t total = 0, accepted = 0;
  for (const auto& r : records) {
    if (!r.true_label.is_open()) continue;
    ++total;
    if (!r.verdict.is_open()) ++accepted;
  }
  if (total == 0) throw std::invalid_argument("fpr needs open-labelled records");
  return static_cast<double>(accepted) / static_cast<double>(total);
}

TaskMetrics task_metrics(std::span<const EvalRecord> records) {
  TaskMetrics m;
  for (const auto& r : records) (r.true_label.is_open() ? m.open_count : m.known_count)++;
  if (m.known_count) m.acc = accuracy(records);
  if (m.open_count) m.fpr = fpr(records);
  if (m.known_count && m.open_count) m.auc = auc(records);
  return m;
}

namespace {

std::optional<double> average(const std::vector<TaskMetrics>& tasks, std::optional<double> TaskMetrics::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : tasks)
    if (t.*field) {
      sum += *(t.*field);
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

MetricsReport build_report(const std::vector<std::vector<EvalRecord>>& per_task_records) {
  MetricsReport rep;
  std::vector<EvalRecord> all;
  for (const auto& recs : per_task_records) {
    rep.per_task.push_back(task_metrics(recs));
    all.insert(all.end(), recs.begin(), recs.end());
  }
  rep.acc = average(rep.per_task, &TaskMetrics::acc);
  rep.auc = average(rep.per_task, &TaskMetrics::auc);
  rep.fpr = average(rep.per_task, &TaskMetrics::fpr);
  rep.pooled = task_metrics(all);
  return rep;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  Summary s;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<AggregateRow> aggregate(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw std::invalid_argument("no reports to aggregate");
  std::vector<AggregateRow> rows;
  std::size_t tasks = 0;
  for (const auto& r : reports) tasks = std::max(tasks, r.per_task.size());

  auto collect = [&](auto&& pick) -> std::optional<Summary> {
    std::vector<double> vals;
    for (const auto& r : reports)
      if (auto v = pick(r)) vals.push_back(*v);
    if (vals.empty()) return std::nullopt;
    return summarize(vals);
  };

  const std::pair<const char*, std::optional<double> TaskMetrics::*> fields[] = {
      {"acc", &TaskMetrics::acc}, {"auc", &TaskMetrics::auc}, {"fpr", &TaskMetrics::fpr}};
  const std::optional<double> MetricsReport::*headline[] = {&MetricsReport::acc, &MetricsReport::auc,
                                                            &MetricsReport::fpr};
  for (std::size_t f = 0; f < 3; ++f) {
    const auto [name, field] = fields[f];
    for (std::size_t t = 0; t < tasks; ++t)
      rows.push_back({name, std::to_string(t), collect([&](const MetricsReport& r) -> std::optional<double> {
                        return t < r.per_task.size() ? r.per_task[t].*field : std::nullopt;
                      })});
    rows.push_back({name, "avg", collect([&](const MetricsReport& r) { return r.*headline[f]; })});
    rows.push_back({name, "pooled", collect([&](const MetricsReport& r) { return r.pooled.*field; })});
  }
  return rows;
}

std::string format_report_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "metric,task,mean,std\n";
  for (const auto& r : rows) {
    out += r.metric + "," + r.task + ",";
    if (r.value) {
      out += format_double(r.value->mean) + ",";
      out += r.value->std ? format_double(*r.value->std) : "NA";
    } else {
      out += "NA,NA";
    }
    out += "\n";
  }
  return out;
}

std::string format_report_json(const std::vector<AggregateRow>& rows, std::span<const MetricsReport> reports) {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  auto task_json = [&](const TaskMetrics& t) {
    return ordered_json{{"acc", opt(t.acc)},
                        {"auc", opt(t.auc)},
                        {"fpr", opt(t.fpr)},
                        {"known_count", t.known_count},
                        {"open_count", t.open_count}};
  };
  ordered_json doc;
  doc["format"] = "owcl-report v1";
  doc["seeds"] = reports.size();
  ordered_json summary = ordered_json::object();
  for (const auto& r : rows) {
    ordered_json v = r.value ? ordered_json{{"mean", r.value->mean}, {"std", opt(r.value->std)}} : ordered_json(nullptr);
    summary[r.metric][r.task] = v;
  }
  doc["summary"] = summary;
  ordered_json per_seed = ordered_json::array();
  for (const auto& rep : reports) {
    ordered_json tasks = ordered_json::array();
    for (const auto& t : rep.per_task) tasks.push_back(task_json(t));
    per_seed.push_back(ordered_json{{"acc", opt(rep.acc)},
                                    {"auc", opt(rep.auc)},
                                    {"fpr", opt(rep.fpr)},
                                    {"pooled", task_json(rep.pooled)},
                                    {"per_task", tasks}});
  }
  doc["per_seed"] = per_seed;
  return doc.dump(2) + "\n";
}

void write_eval_records(const std::vector<EvalRecord>& records, std::int64_t task, const std::filesystem::path& path) {
  std::string out = "#owcl-eval v1 task=" + std::to_string(task) + "\n";
  for (const auto& r : records) {
    out += r.true_label.to_string();
    out += ',';
    out += r.verdict.is_open() ? std::string("UN") : std::to_string(r.verdict.known_class());
    out += ',';
    out += format_double(r.best_score);
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << out;
  if (!f) throw IoError("write failed for " + path.string());
}

std::vector<EvalRecord> read_eval_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<EvalRecord> out;
  auto parse_label = [&](const std::string& tok) -> std::optional<ClassId> {
    if (tok == "UN") return std::nullopt;
    ClassId id = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), id);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || id < 0)
      throw ParseError("bad label '" + tok + "'", line_no);
    return id;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (!line.starts_with("#owcl-eval v1")) throw ParseError("missing '#owcl-eval v1' header", 1);
      continue;
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c) ||
        c.find(',') != std::string::npos)
      throw ParseError("expected 3 fields", line_no);
    EvalRecord r;
    auto t = parse_label(a);
    r.true_label = t ? Label::known(*t) : Label::open();
    auto v = parse_label(b);
    r.verdict = v ? Verdict::known(*v) : Verdict::open();
    auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), r.best_score);
    if (ec != std::errc{} || ptr != c.data() + c.size() || !std::isfinite(r.best_score))
      throw ParseError("bad score '" + c + "'", line_no);
    out.push_back(r);
  }
  if (line_no == 0) throw ParseError("empty eval file", 1);
  return out;
}

}  // namespace owcl
