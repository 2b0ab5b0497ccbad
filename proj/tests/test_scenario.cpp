#include <fstream>
#include <map>

#include "doctest.h"
#include "owcl/scenario.hpp"
#include "test_util.hpp"

using namespace owcl;

namespace {

ScenarioConfig small(Scenario s, std::size_t tasks, std::uint64_t seed = 1) {
  auto c = ScenarioConfig::preset(s);
  c.num_tasks = tasks;
  if (!open_samples_recur(s)) c.num_open_classes = tasks;
  c.dimension = 8;
  c.train_per_class = 20;
  c.test_per_class = 10;
  c.seed = seed;
  return c;
}

std::set<ClassId> train_classes(const TaskDataset& t) { return t.class_set(); }

std::set<ClassId> open_in_test(const ScenarioStream& s, std::size_t t) {
  std::set<ClassId> out(s.open_schedule[t].begin(), s.open_schedule[t].end());
  return out;
}

Vector class_mean(const std::vector<EmbeddingRecord>& recs, ClassId k, std::size_t d) {
  Vector m = Vector::Zero(static_cast<Eigen::Index>(d));
  int n = 0;
  for (const auto& r : recs)
    if (!r.label.is_open() && r.label.id() == k) {
      for (std::size_t j = 0; j < d; ++j) m(j) += r.vector[j];
      ++n;
    }
  return m / n;
}

}  // namespace

TEST_CASE("scenario names and axes") {
  for (auto s : {Scenario::CINO, Scenario::CIRO, Scenario::KINO, Scenario::KIRO})
    CHECK(parse_scenario(to_string(s)) == s);
  CHECK_THROWS_AS(parse_scenario("XYZ"), ConfigError);
  CHECK_FALSE(known_classes_recur(Scenario::CIRO));
  CHECK(known_classes_recur(Scenario::KINO));
  CHECK(open_samples_recur(Scenario::CIRO));
  CHECK_FALSE(open_samples_recur(Scenario::KINO));
}

TEST_CASE("config validation") {
  auto c = ScenarioConfig::preset(Scenario::CIRO);
  c.recurrence_rate = 0.7;
  c.drift_magnitude = 3;
  const auto v = validated(c);
  CHECK(v.recurrence_rate == 0.0);
  CHECK(v.drift_magnitude == 0.0);

  auto k = ScenarioConfig::preset(Scenario::KIRO);
  k.recurrence_rate = 0.0;
  CHECK_THROWS_AS(validated(k), ConfigError);

  auto cino = ScenarioConfig::preset(Scenario::CINO);
  cino.num_open_classes = cino.num_tasks - 1;
  CHECK_THROWS_AS(validated(cino), ConfigError);

  auto ciro = ScenarioConfig::preset(Scenario::CIRO);
  ciro.num_open_classes = 0;
  CHECK_THROWS_AS(validated(ciro), ConfigError);
  ciro.num_open_classes = 1;
  ciro.class_separation = -1;
  CHECK_THROWS_AS(validated(ciro), ConfigError);
}

TEST_CASE("CINO with two tasks") {
  const auto s = generate(small(Scenario::CINO, 2));
  REQUIRE(s.tasks.size() == 2);
  std::set<ClassId> a = train_classes(s.tasks[0]), b = train_classes(s.tasks[1]);
  for (auto k : a) CHECK_FALSE(b.count(k));
  // task 0's open class does not show up again
  for (auto k : open_in_test(s, 0)) CHECK_FALSE(open_in_test(s, 1).count(k));
  CHECK(check_scenario_axioms(s).empty());
}

TEST_CASE("KIRO with two tasks") {
  auto c = small(Scenario::KIRO, 2);
  c.recurrence_rate = 0.5;
  const auto s = generate(c);
  std::set<ClassId> a = train_classes(s.tasks[0]), b = train_classes(s.tasks[1]);
  std::vector<ClassId> both;
  for (auto k : a)
    if (b.count(k)) both.push_back(k);
  REQUIRE_FALSE(both.empty());
  CHECK(both == s.recurrences[1]);
  // the recurring class moved
  for (auto k : both) {
    const Vector m0 = class_mean(s.tasks[0].train, k, 8), m1 = class_mean(s.tasks[1].train, k, 8);
    CHECK((m1 - m0).norm() > 0.3);
  }
  std::set<ClassId> shared;
  for (auto k : open_in_test(s, 0))
    if (open_in_test(s, 1).count(k)) shared.insert(k);
  CHECK_FALSE(shared.empty());
  CHECK(check_scenario_axioms(s).empty());
}

TEST_CASE("generation is seeded") {
  for (auto sc : {Scenario::CINO, Scenario::KIRO}) {
    const auto a = generate(small(sc, 3, 5)), b = generate(small(sc, 3, 5));
    CHECK(a.tasks == b.tasks);
    CHECK(a.open_schedule == b.open_schedule);
    CHECK_FALSE(generate(small(sc, 3, 6)).tasks == a.tasks);
  }
}

TEST_CASE("axioms hold for every preset over many seeds") {
  for (auto sc : {Scenario::CINO, Scenario::CIRO, Scenario::KINO, Scenario::KIRO})
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto s = generate(small(sc, 4, seed));
      const auto bad = check_scenario_axioms(s);
      CAPTURE(to_string(sc));
      CAPTURE(seed);
      CHECK(bad.empty());
      for (const auto& t : s.tasks) CHECK_NOTHROW(validate(t));
    }
}

TEST_CASE("axiom checker notices violations") {
  auto s = generate(small(Scenario::CINO, 3));
  auto leaked = s;
  leaked.tasks[1].train[0].label = Label::known(*s.ground_truth_open_ids.begin());
  CHECK_FALSE(check_scenario_axioms(leaked).empty());

  auto shared = s;
  shared.tasks[1].train[0].label = shared.tasks[0].train[0].label;
  CHECK_FALSE(check_scenario_axioms(shared).empty());

  auto repeated = s;
  repeated.open_schedule[1] = repeated.open_schedule[0];
  CHECK_FALSE(check_scenario_axioms(repeated).empty());

  auto k = generate(small(Scenario::KIRO, 3));
  for (auto& sched : k.open_schedule) sched.clear();
  CHECK_FALSE(check_scenario_axioms(k).empty());
}

TEST_CASE("test split covers every class trained so far plus the open quota") {
  const auto s = generate(small(Scenario::KINO, 4, 3));
  std::set<ClassId> trained;
  for (std::size_t t = 0; t < s.tasks.size(); ++t) {
    for (auto k : s.tasks[t].class_set()) trained.insert(k);
    std::map<ClassId, int> known;
    int open = 0;
    for (const auto& r : s.tasks[t].test) r.label.is_open() ? ++open : ++known[r.label.id()];
    CHECK(known.size() == trained.size());
    for (auto [k, n] : known) {
      CHECK(trained.count(k));
      CHECK(n == 10);
    }
    CHECK(open == (s.open_schedule[t].empty() ? 0 : 10));
  }
}

TEST_CASE("class means respect the separation") {
  auto c = small(Scenario::CIRO, 5);
  c.train_per_class = 400;
  const auto s = generate(c);
  std::vector<Vector> means;
  for (const auto& t : s.tasks)
    for (auto k : t.class_set()) means.push_back(class_mean(t.train, k, 8));
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < means.size(); ++i)
    for (std::size_t j = i + 1; j < means.size(); ++j) nearest = std::min(nearest, (means[i] - means[j]).norm());
  CHECK(nearest >= 0.9 * c.class_separation * c.within_class_sigma);
}

TEST_CASE("export writes one file per task plus a manifest") {
  const auto s = generate(small(Scenario::KIRO, 4, 2));
  const auto dir = test::scratch("export");
  export_stream(s, dir);
  const auto m = read_manifest(dir / kManifestName);
  CHECK(m.task_files.size() == 4);
  CHECK(m.open_ids == s.ground_truth_open_ids);
  CHECK(m.open_schedule == s.open_schedule);
  CHECK(m.scenario == "KIRO");
  CHECK(m.seed == 2);
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.is_regular_file();
  CHECK(files == 5);
  const auto tasks = load_tasks(dir / kManifestName);
  CHECK(tasks == s.tasks);
  for (const auto& t : tasks) CHECK_NOTHROW(validate(t));
}

TEST_CASE("manifest round trip and errors") {
  const auto dir = test::scratch("manifest");
  Manifest m;
  m.scenario = "external";
  m.seed = 9;
  m.task_files = {"a.owcl", "b.owcl"};
  m.open_ids = {10, 12};
  m.open_schedule = {{10}, {10, 12}};
  write_manifest(m, dir / "m.txt");
  const auto back = read_manifest(dir / "m.txt");
  CHECK(back.task_files == m.task_files);
  CHECK(back.open_ids == m.open_ids);
  CHECK(back.open_schedule == m.open_schedule);
  {
    std::ofstream out(dir / "bad.txt");
    out << "#owcl-manifest v1\nscenario=x\n";
  }
  CHECK_THROWS_AS(read_manifest(dir / "bad.txt"), ParseError);
  CHECK_THROWS_AS(read_manifest(dir / "none.txt"), IoError);
}
