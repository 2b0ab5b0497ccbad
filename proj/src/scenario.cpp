#include "owcl/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "owcl/rng.hpp"

namespace owcl {

namespace fs = std::filesystem;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::CINO: return "CINO";
    case Scenario::CIRO: return "CIRO";
    case Scenario::KINO: return "KINO";
    case Scenario::KIRO: return "KIRO";
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  for (auto s : {Scenario::CINO, Scenario::CIRO, Scenario::KINO, Scenario::KIRO})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown scenario '" + name + "' (expected CINO, CIRO, KINO or KIRO)");
}

bool known_classes_recur(Scenario s) { return s == Scenario::KINO || s == Scenario::KIRO; }
bool open_samples_recur(Scenario s) { return s == Scenario::CIRO || s == Scenario::KIRO; }

ScenarioConfig ScenarioConfig::preset(Scenario s) {
  ScenarioConfig c;
  c.scenario = s;
  if (known_classes_recur(s)) {
    c.recurrence_rate = 0.5;
    c.drift_magnitude = 1.0;
  }
  c.num_open_classes = open_samples_recur(s) ? 3 : c.num_tasks;
  return c;
}

ScenarioConfig validated(const ScenarioConfig& config) {
  ScenarioConfig c = config;
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("scenario config: " + what);
  };
  require(c.dimension >= 1, "dimension must be >= 1");
  require(c.num_tasks >= 1, "num_tasks must be >= 1");
  require(c.classes_per_task >= 1, "classes_per_task must be >= 1");
  require(c.train_per_class >= 1 && c.test_per_class >= 1, "per-class sample counts must be >= 1");
  require(c.class_separation > 0.0 && std::isfinite(c.class_separation), "class_separation must be positive");
  require(c.within_class_sigma > 0.0 && std::isfinite(c.within_class_sigma), "within_class_sigma must be positive");
  require(c.drift_magnitude >= 0.0 && std::isfinite(c.drift_magnitude), "drift_magnitude must be >= 0");
  require(c.recurrence_rate >= 0.0 && c.recurrence_rate <= 1.0, "recurrence_rate must lie in [0, 1]");
  if (known_classes_recur(c.scenario)) {
    require(c.recurrence_rate > 0.0, to_string(c.scenario) + " needs recurrence_rate > 0");
  } else {
    c.recurrence_rate = 0.0;
    c.drift_magnitude = 0.0;
  }
  if (open_samples_recur(c.scenario))
    require(c.num_open_classes >= 1, to_string(c.scenario) + " needs at least one open class");
  else
    require(c.num_open_classes >= c.num_tasks, to_string(c.scenario) + " needs num_open_classes >= num_tasks");
  return c;
}

namespace {

Vector sample_direction(std::size_t d, Rng& rng) {
  Vector u(static_cast<Eigen::Index>(d));
  do {
    for (Eigen::Index j = 0; j < u.size(); ++j) u(j) = rng.normal();
  } while (u.norm() == 0.0);
  return u / u.norm();
}

/// Distinct points of a centred {0..L-1}^d lattice with spacing
/// `spacing`, plus small Gaussian jitter.
std::vector<Vector> lattice_means(std::size_t count, std::size_t d, double spacing, Rng& rng) {
  std::size_t side = 2;
  while (std::pow(static_cast<double>(side), static_cast<double>(d)) < static_cast<double>(count)) ++side;
  std::set<std::vector<std::uint64_t>> used;
  std::vector<Vector> means;
  means.reserve(count);
  const double centre = 0.5 * static_cast<double>(side - 1);
  const double jitter = 0.05 * spacing / std::sqrt(static_cast<double>(d));
  while (means.size() < count) {
    std::vector<std::uint64_t> cell(d);
    for (auto& c : cell) c = rng.below(side);
    if (!used.insert(cell).second) continue;
    Vector mu(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j)
      mu(static_cast<Eigen::Index>(j)) = (static_cast<double>(cell[j]) - centre) * spacing + jitter * rng.normal();
    means.push_back(std::move(mu));
  }
  return means;
}

EmbeddingRecord draw(const Vector& mu, double sigma, Label label, std::int64_t task, Split split, Rng& rng) {
  EmbeddingRecord r;
  r.vector.resize(static_cast<std::size_t>(mu.size()));
  for (Eigen::Index j = 0; j < mu.size(); ++j) r.vector[static_cast<std::size_t>(j)] = mu(j) + sigma * rng.normal();
  r.label = label;
  r.task_id = task;
  r.split = split;
  return r;
}

}  // namespace

ScenarioStream generate(const ScenarioConfig& raw) {
  const ScenarioConfig c = validated(raw);
  Rng rng(c.seed);
  ScenarioStream stream;
  stream.scenario = c.scenario;
  stream.seed = c.seed;

  // Which classes each task trains on.
  std::vector<std::vector<ClassId>> task_classes(c.num_tasks);
  stream.recurrences.assign(c.num_tasks, {});
  ClassId next_id = 0;
  std::vector<ClassId> seen;
  for (std::size_t t = 0; t < c.num_tasks; ++t) {
    std::size_t n_recur = 0;
    if (t > 0 && c.recurrence_rate > 0.0) {
      n_recur = static_cast<std::size_t>(std::llround(c.recurrence_rate * static_cast<double>(c.classes_per_task)));
      n_recur = std::clamp<std::size_t>(n_recur, 1, std::min(c.classes_per_task, seen.size()));
    }
    std::vector<ClassId> pool = seen;
    for (std::size_t i = 0; i < n_recur; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
      task_classes[t].push_back(pool[i]);
      stream.recurrences[t].push_back(pool[i]);
    }
    for (std::size_t i = n_recur; i < c.classes_per_task; ++i) {
      task_classes[t].push_back(next_id);
      seen.push_back(next_id++);
    }
    std::sort(task_classes[t].begin(), task_classes[t].end());
    std::sort(stream.recurrences[t].begin(), stream.recurrences[t].end());
  }

  const auto known_count = static_cast<std::size_t>(next_id);
  std::vector<ClassId> open_ids;
  for (std::size_t j = 0; j < c.num_open_classes; ++j) open_ids.push_back(next_id + static_cast<ClassId>(j));
  stream.ground_truth_open_ids = {open_ids.begin(), open_ids.end()};

  stream.open_schedule.assign(c.num_tasks, {});
  for (std::size_t j = 0; j < open_ids.size(); ++j) {
    if (open_samples_recur(c.scenario)) {
      for (auto& sched : stream.open_schedule) sched.push_back(open_ids[j]);
    } else {
      stream.open_schedule[j % c.num_tasks].push_back(open_ids[j]);
    }
  }

  const double sigma = c.within_class_sigma;
  std::vector<Vector> means =
      lattice_means(known_count + open_ids.size(), c.dimension, c.class_separation * sigma, rng);

  std::vector<ClassId> trained;
  for (std::size_t t = 0; t < c.num_tasks; ++t) {
    const auto task = static_cast<std::int64_t>(t);
    TaskDataset ds;
    ds.task_id = task;
    ds.dimension = c.dimension;

    for (ClassId k : stream.recurrences[t])
      means[static_cast<std::size_t>(k)] += c.drift_magnitude * sigma * sample_direction(c.dimension, rng);

    for (ClassId k : task_classes[t]) {
      for (std::size_t i = 0; i < c.train_per_class; ++i)
        ds.train.push_back(draw(means[static_cast<std::size_t>(k)], sigma, Label::known(k), task, Split::train, rng));
      if (std::find(trained.begin(), trained.end(), k) == trained.end()) trained.push_back(k);
    }
    std::sort(trained.begin(), trained.end());

    for (ClassId k : trained)
      for (std::size_t i = 0; i < c.test_per_class; ++i)
        ds.test.push_back(draw(means[static_cast<std::size_t>(k)], sigma, Label::known(k), task, Split::test, rng));

    const auto& sched = stream.open_schedule[t];
    for (std::size_t j = 0; j < sched.size(); ++j) {
      const std::size_t share = c.test_per_class / sched.size() + (j < c.test_per_class % sched.size() ? 1 : 0);
      for (std::size_t i = 0; i < share; ++i)
        ds.test.push_back(
            draw(means[static_cast<std::size_t>(sched[j])], sigma, Label::open(), task, Split::test, rng));
    }
    stream.tasks.push_back(std::move(ds));
  }
  return stream;
}

std::vector<std::string> check_scenario_axioms(const ScenarioStream& stream) {
  std::vector<std::string> bad;
  const std::size_t T = stream.tasks.size();
  if (stream.open_schedule.size() != T) bad.push_back("open schedule length differs from task count");

  std::vector<std::set<ClassId>> train_sets;
  for (const auto& task : stream.tasks) {
    std::set<ClassId> cls;
    for (const auto& r : task.train) {
      if (r.label.is_open()) {
        bad.push_back("open marker in train split of task " + std::to_string(task.task_id));
        continue;
      }
      if (stream.ground_truth_open_ids.count(r.label.id()))
        bad.push_back("open class " + std::to_string(r.label.id()) + " trained in task " +
                      std::to_string(task.task_id));
      cls.insert(r.label.id());
    }
    train_sets.push_back(std::move(cls));
  }

  std::map<ClassId, std::size_t> open_task_count;
  for (std::size_t t = 0; t < stream.open_schedule.size(); ++t) {
    for (ClassId id : stream.open_schedule[t]) {
      if (!stream.ground_truth_open_ids.count(id))
        bad.push_back("scheduled open class " + std::to_string(id) + " is not reserved as open");
      ++open_task_count[id];
    }
    if (t < T) {
      const auto n_open = std::count_if(stream.tasks[t].test.begin(), stream.tasks[t].test.end(),
                                        [](const EmbeddingRecord& r) { return r.label.is_open(); });
      if ((n_open > 0) != !stream.open_schedule[t].empty())
        bad.push_back("task " + std::to_string(t) + " open test records disagree with its schedule");
    }
  }

  std::set<ClassId> trained;
  for (std::size_t t = 0; t < T; ++t) {
    trained.insert(train_sets[t].begin(), train_sets[t].end());
    std::set<ClassId> tested;
    for (const auto& r : stream.tasks[t].test)
      if (!r.label.is_open()) tested.insert(r.label.id());
    if (tested != trained) bad.push_back("task " + std::to_string(t) + " test split does not cover all seen classes");
  }

  if (open_samples_recur(stream.scenario)) {
    const bool repeated = std::any_of(open_task_count.begin(), open_task_count.end(),
                                      [](const auto& kv) { return kv.second >= 2; });
    if (T >= 2 && !repeated) bad.push_back("no open class recurs across tasks");
  } else {
    for (const auto& [id, n] : open_task_count)
      if (n > 1) bad.push_back("open class " + std::to_string(id) + " appears in " + std::to_string(n) + " tasks");
  }

  bool recurring_known = false;
  for (std::size_t a = 0; a < T; ++a)
    for (std::size_t b = a + 1; b < T; ++b)
      for (ClassId id : train_sets[a])
        if (train_sets[b].count(id)) recurring_known = true;
  if (known_classes_recur(stream.scenario)) {
    if (T >= 2 && !recurring_known) bad.push_back("no known class recurs across tasks");
  } else if (recurring_known) {
    bad.push_back("training class sets of distinct tasks overlap");
  }
  return bad;
}

namespace {

std::string join_ids(const std::vector<ClassId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

std::vector<ClassId> parse_ids(const std::string& text, std::size_t line) {
  std::vector<ClassId> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    ClassId id = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), id);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || id < 0)
      throw ParseError("bad class id '" + tok + "' in manifest", line);
    out.push_back(id);
  }
  return out;
}

}  // namespace

void write_manifest(const Manifest& m, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "#owcl-manifest v1\n";
  out << "scenario=" << m.scenario << "\n";
  out << "seed=" << m.seed << "\n";
  out << "tasks=" << m.task_files.size() << "\n";
  out << "open_ids=" << join_ids({m.open_ids.begin(), m.open_ids.end()}) << "\n";
  for (std::size_t t = 0; t < m.task_files.size(); ++t) {
    out << "task." << t << ".file=" << m.task_files[t].generic_string() << "\n";
    out << "task." << t << ".open=" << (t < m.open_schedule.size() ? join_ids(m.open_schedule[t]) : "") << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::pair<std::string, std::size_t>> kv;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "#owcl-manifest v1") throw ParseError("missing '#owcl-manifest v1' header", 1);
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    kv[line.substr(0, eq)] = {line.substr(eq + 1), line_no};
  }
  if (line_no == 0) throw ParseError("empty manifest", 1);

  auto get = [&](const std::string& key) -> const std::pair<std::string, std::size_t>& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("manifest missing key '" + key + "'", 0);
    return it->second;
  };
  auto to_u64 = [](const std::pair<std::string, std::size_t>& v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.first.data(), v.first.data() + v.first.size(), out);
    if (ec != std::errc{} || ptr != v.first.data() + v.first.size())
      throw ParseError("bad integer '" + v.first + "'", v.second);
    return out;
  };

  Manifest m;
  m.scenario = get("scenario").first;
  m.seed = to_u64(get("seed"));
  const auto tasks = to_u64(get("tasks"));
  const auto& open = get("open_ids");
  const auto ids = parse_ids(open.first, open.second);
  m.open_ids = {ids.begin(), ids.end()};
  for (std::uint64_t t = 0; t < tasks; ++t) {
    const std::string prefix = "task." + std::to_string(t);
    m.task_files.emplace_back(get(prefix + ".file").first);
    auto it = kv.find(prefix + ".open");
    m.open_schedule.push_back(it == kv.end() ? std::vector<ClassId>{} : parse_ids(it->second.first, it->second.second));
  }
  return m;
}

void export_stream(const ScenarioStream& stream, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  Manifest m;
  m.scenario = to_string(stream.scenario);
  m.seed = stream.seed;
  m.open_ids = stream.ground_truth_open_ids;
  m.open_schedule = stream.open_schedule;
  for (std::size_t t = 0; t < stream.tasks.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "task_%03zu.owcl", t);
    write_dataset(stream.tasks[t], dir / name);
    m.task_files.emplace_back(name);
  }
  write_manifest(m, dir / kManifestName);
}

std::vector<TaskDataset> load_tasks(const fs::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  std::vector<TaskDataset> tasks;
  for (const auto& f : m.task_files) tasks.push_back(read_dataset(manifest_path.parent_path() / f));
  return tasks;
}

}  // namespace owcl
