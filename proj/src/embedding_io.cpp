#include "owcl/embedding_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace owcl {

namespace {

constexpr std::string_view kHeaderTag = "#owcl v1";

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename Int>
bool parse_int(std::string_view token, Int& out) {
  if (token.empty()) return false;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

bool parse_real(std::string_view token, double& out) {
  if (token.empty()) return false;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

struct Header {
  std::size_t dimension = 0;
  std::int64_t task_id = 0;
};

Header parse_header(std::string_view line) {
  if (!line.starts_with(kHeaderTag)) throw ParseError("missing '#owcl v1' header", 1);
  bool have_dim = false, have_task = false;
  Header h;
  for (auto field : split_on(line.substr(kHeaderTag.size()), ' ')) {
    if (field.empty()) continue;
    if (field.starts_with("dim=")) {
      if (!parse_int(field.substr(4), h.dimension) || h.dimension == 0)
        throw ParseError("bad dim in header", 1);
      have_dim = true;
    } else if (field.starts_with("task=")) {
      if (!parse_int(field.substr(5), h.task_id) || h.task_id < 0)
        throw ParseError("bad task in header", 1);
      have_task = true;
    } else {
      throw ParseError("unknown header field '" + std::string(field) + "'", 1);
    }
  }
  if (!have_dim || !have_task) throw ParseError("header must declare dim and task", 1);
  return h;
}

}  // namespace

std::set<ClassId> TaskDataset::class_set() const {
  std::set<ClassId> out;
  for (const auto& r : train) out.insert(r.label.id());
  return out;
}

void validate(const TaskDataset& dataset) {
  if (dataset.dimension == 0) throw ParseError("dimension must be positive", 0);
  if (dataset.task_id < 0) throw ParseError("task id must be non-negative", 0);
  auto check = [&](const EmbeddingRecord& r, Split expected) {
    if (r.split != expected) throw ParseError("record stored under the wrong split", 0);
    if (r.vector.size() != dataset.dimension)
      throw ParseError("record length " + std::to_string(r.vector.size()) + " != dim " +
                           std::to_string(dataset.dimension),
                       0);
    if (r.task_id < 0) throw ParseError("negative record task id", 0);
    for (double v : r.vector)
      if (!std::isfinite(v)) throw ParseError("non-finite coordinate", 0);
  };
  for (const auto& r : dataset.train) {
    check(r, Split::train);
    if (r.label.is_open()) throw ParseError("open marker in train split", 0);
    if (r.task_id != dataset.task_id) throw ParseError("train record task id differs from dataset", 0);
  }
  for (const auto& r : dataset.test) check(r, Split::test);
}

TaskDataset parse_dataset(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  TaskDataset ds;
  bool have_header = false;

  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (!have_header) {
      const Header h = parse_header(line);
      ds.dimension = h.dimension;
      ds.task_id = h.task_id;
      have_header = true;
      continue;
    }
    if (line.empty()) continue;

    const auto fields = split_on(line, ',');
    if (fields.size() != ds.dimension + 3)
      throw ParseError("expected " + std::to_string(ds.dimension) + " coordinates, got " +
                           std::to_string(fields.size() < 3 ? 0 : fields.size() - 3),
                       line_no);

    EmbeddingRecord rec;
    if (fields[0] == "UN") {
      rec.label = Label::open();
    } else {
      ClassId id = 0;
      if (!parse_int(fields[0], id) || id < 0)
        throw ParseError("bad label '" + std::string(fields[0]) + "'", line_no);
      rec.label = Label::known(id);
    }
    if (!parse_int(fields[1], rec.task_id) || rec.task_id < 0)
      throw ParseError("bad task id '" + std::string(fields[1]) + "'", line_no);
    if (fields[2] == "train") {
      rec.split = Split::train;
    } else if (fields[2] == "test") {
      rec.split = Split::test;
    } else {
      throw ParseError("bad split '" + std::string(fields[2]) + "'", line_no);
    }
    rec.vector.resize(ds.dimension);
    for (std::size_t j = 0; j < ds.dimension; ++j) {
      if (!parse_real(fields[j + 3], rec.vector[j]))
        throw ParseError("bad number '" + std::string(fields[j + 3]) + "'", line_no);
      if (!std::isfinite(rec.vector[j])) throw ParseError("non-finite value", line_no);
    }

    if (rec.split == Split::train) {
      if (rec.label.is_open()) throw ParseError("open marker UN in train split", line_no);
      if (rec.task_id != ds.task_id)
        throw ParseError("train row task id differs from header task", line_no);
      ds.train.push_back(std::move(rec));
    } else {
      ds.test.push_back(std::move(rec));
    }
  }
  if (!have_header) throw ParseError("empty file", 1);
  return ds;
}

TaskDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dataset(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_dataset(const TaskDataset& dataset) {
  validate(dataset);
  std::string out = "#owcl v1 dim=" + std::to_string(dataset.dimension) +
                    " task=" + std::to_string(dataset.task_id) + "\n";
  auto emit = [&](const EmbeddingRecord& r) {
    out += r.label.to_string();
    out += ',';
    out += std::to_string(r.task_id);
    out += r.split == Split::train ? ",train" : ",test";
    for (double v : r.vector) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  };
  for (const auto& r : dataset.train) emit(r);
  for (const auto& r : dataset.test) emit(r);
  return out;
}

void write_dataset(const TaskDataset& dataset, const std::filesystem::path& path) {
  const std::string text = format_dataset(dataset);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

RowMatrix stack_vectors(std::span<const EmbeddingRecord> records, std::size_t dimension) {
  RowMatrix m(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(dimension));
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].vector.size() != dimension) throw DimensionError("record dimension mismatch");
    for (std::size_t j = 0; j < dimension; ++j) m(i, j) = records[i].vector[j];
  }
  return m;
}

}  // namespace owcl
