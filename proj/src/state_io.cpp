#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "owcl/knowledge_state.hpp"

namespace owcl {

namespace {

constexpr std::array<char, 8> kMagic = {'O', 'W', 'C', 'L', 'S', 'T', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;
// Guards allocation on corrupt headers.
constexpr std::uint64_t kMaxDim = 1u << 20;

class Writer {
public:
  void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void matrix(const RowMatrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
  }
  const std::string& str() const { return buf_; }

private:
  std::string buf_;
};

class Reader {
public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw StateFormatError("state file truncated");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::uint64_t dim() {
    const auto v = u64();
    if (v > kMaxDim) throw StateFormatError("implausible dimension in state file");
    return v;
  }
  RowMatrix matrix(std::uint64_t rows, std::uint64_t cols) {
    need(rows * cols * 8);
    RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
    return m;
  }
  std::array<char, 8> magic() {
    need(8);
    std::array<char, 8> out{};
    std::memcpy(out.data(), data_.data() + pos_, 8);
    pos_ += 8;
    return out;
  }
  bool at_end() const { return pos_ == data_.size(); }

private:
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_state(const KnowledgeState& s, const std::filesystem::path& path) {
  Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kVersion);

  const auto& p = s.projection_;
  w.u64(p.input_dim());
  w.u64(p.output_dim());
  w.u8(p.nonlinearity() == Nonlinearity::relu ? 0 : 1);
  w.u64(p.seed());
  w.f64(p.sigma_w());
  w.matrix(p.matrix());

  w.f64(s.ridge_lambda_);
  w.matrix(s.gram_);
  w.u64(s.class_ids_.size());
  for (auto id : s.class_ids_) w.i64(id);
  for (auto c : s.class_counts_) w.u64(c);
  w.matrix(s.aggregate_);
  w.u64(s.total_count_);
  w.f64(s.delta_sq_);
  w.u64(s.delta_count_);
  w.f64(s.threshold_ratio_);
  w.u8(s.calibrated_ ? 1 : 0);
  w.f64(s.train_score_mean_);
  w.u64(s.reservoir_.capacity());
  w.u64(s.reservoir_.seen());
  w.u64(s.reservoir_.values().size());
  for (double v : s.reservoir_.values()) w.f64(v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(w.str().data(), static_cast<std::streamsize>(w.str().size()));
  if (!out) throw IoError("write failed for " + path.string());
}

KnowledgeState load_state(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Reader r(buf.str());

  if (r.magic() != kMagic) throw StateFormatError(path.string() + ": not an OWCLSTAT file");
  const auto version = r.u32();
  if (version != kVersion)
    throw StateFormatError(path.string() + ": unsupported state version " + std::to_string(version));

  const auto d = r.dim();
  const auto m = r.dim();
  const auto g = r.u8();
  if (g > 1) throw StateFormatError("bad nonlinearity tag");
  const auto seed = r.u64();
  const double sigma_w = r.f64();
  RowMatrix w = r.matrix(d, m);
  const double lambda = r.f64();
  if (!(sigma_w > 0.0) || !(lambda > 0.0) || !w.allFinite())
    throw StateFormatError(path.string() + ": invalid projection or ridge parameters");
  KnowledgeState s(
      ProjectionParams(std::move(w), g == 0 ? Nonlinearity::relu : Nonlinearity::identity, seed, sigma_w),
      lambda);
  s.gram_ = r.matrix(m, m);
  const auto k = r.dim();
  s.class_ids_.resize(k);
  for (auto& id : s.class_ids_) id = r.i64();
  s.class_counts_.resize(k);
  for (auto& c : s.class_counts_) c = r.u64();
  s.aggregate_ = r.matrix(m, k);
  s.total_count_ = r.u64();
  s.delta_sq_ = r.f64();
  s.delta_count_ = r.u64();
  s.threshold_ratio_ = r.f64();
  s.calibrated_ = r.u8() != 0;
  s.train_score_mean_ = r.f64();
  const auto capacity = r.dim();
  const auto seen = r.u64();
  const auto n = r.dim();
  std::vector<double> values(n);
  for (auto& v : values) v = r.f64();
  s.reservoir_ = ScoreReservoir(capacity, seen, std::move(values));
  if (!r.at_end()) throw StateFormatError(path.string() + ": trailing bytes");
  if (!std::is_sorted(s.class_ids_.begin(), s.class_ids_.end()))
    throw StateFormatError(path.string() + ": class ids out of order");
  return s;
}

}  // namespace owcl
