#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "owcl/embedding_io.hpp"

namespace owcl {

/// The four open-world stream types, crossing "known classes recur (with
/// shifted distributions)" with "open classes recur across tasks".
enum class Scenario { CINO, CIRO, KINO, KIRO };

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& name);
bool known_classes_recur(Scenario s);
bool open_samples_recur(Scenario s);

struct ScenarioConfig {
  Scenario scenario = Scenario::CIRO;
  std::size_t dimension = 32;
  std::size_t num_tasks = 5;
  std::size_t classes_per_task = 4;
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 50;
  std::size_t num_open_classes = 3;
  double class_separation = 8.0;   // lattice spacing, in units of sigma
  double within_class_sigma = 1.0;
  double drift_magnitude = 0.0;    // mean shift on recurrence, in units of sigma
  double recurrence_rate = 0.0;    // share of a task's classes that recur
  std::uint64_t seed = 0;

  /// Defaults for `s`: KIL scenarios recur half their classes with a 1 sigma drift.
  static ScenarioConfig preset(Scenario s);
};

/// Copy of `config` with the CI scenarios' recurrence and drift forced to
/// zero. Throws ConfigError on any other violation.
ScenarioConfig validated(const ScenarioConfig& config);

struct ScenarioStream {
  Scenario scenario = Scenario::CIRO;
  std::uint64_t seed = 0;
  std::vector<TaskDataset> tasks;
  std::set<ClassId> ground_truth_open_ids;
  /// Open classes whose samples appear (labelled UN) in each task's test split.
  std::vector<std::vector<ClassId>> open_schedule;
  /// Known classes re-emitted with a drifted mean in each task.
  std::vector<std::vector<ClassId>> recurrences;
};

/// Gaussian class clusters on a jittered hypercube lattice. Task t's test
/// split holds every class trained up to t plus open samples per the
/// scenario's repetition rule. Fully determined by config.seed.
ScenarioStream generate(const ScenarioConfig& config);

/// Violations of the stream invariants for its scenario; empty when all hold.
std::vector<std::string> check_scenario_axioms(const ScenarioStream& stream);

struct Manifest {
  std::string scenario;  // scenario name, or free text for external data
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> task_files;  // relative to the manifest directory
  std::set<ClassId> open_ids;
  std::vector<std::vector<ClassId>> open_schedule;
};

constexpr const char* kManifestName = "manifest.txt";

/// One `#owcl v1` file per task plus `manifest.txt` in `dir`.
void export_stream(const ScenarioStream& stream, const std::filesystem::path& dir);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);
/// Reads every task file named by the manifest at `manifest_path`.
std::vector<TaskDataset> load_tasks(const std::filesystem::path& manifest_path);

}  // namespace owcl
