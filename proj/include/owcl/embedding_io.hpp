#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "owcl/types.hpp"

namespace owcl {

enum class Split { train, test };

struct EmbeddingRecord {
  std::vector<double> vector;
  Label label = Label::open();
  std::int64_t task_id = 0;
  Split split = Split::train;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

/// One task's train and test records, all of a common dimension.
struct TaskDataset {
  std::int64_t task_id = 0;
  std::size_t dimension = 0;
  std::vector<EmbeddingRecord> train;
  std::vector<EmbeddingRecord> test;

  /// Distinct labels of the train split.
  std::set<ClassId> class_set() const;

  friend bool operator==(const TaskDataset&, const TaskDataset&) = default;
};

/// Throws ParseError (line 0) describing the first violated invariant.
void validate(const TaskDataset& dataset);

/// Reads the `#owcl v1` text format. Errors carry the offending line number.
TaskDataset read_dataset(const std::filesystem::path& path);
TaskDataset parse_dataset(std::string_view text);

void write_dataset(const TaskDataset& dataset, const std::filesystem::path& path);
std::string format_dataset(const TaskDataset& dataset);

/// Stacks record vectors into an n x d matrix.
RowMatrix stack_vectors(std::span<const EmbeddingRecord> records, std::size_t dimension);

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

}  // namespace owcl
