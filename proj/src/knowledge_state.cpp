#include "owcl/knowledge_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "owcl/kernels.hpp"
#include "owcl/rng.hpp"

namespace owcl {

namespace {
constexpr double kMaxCondition = 1e12;
constexpr std::uint64_t kReservoirSalt = 0x0ddba11c0ffeeULL;
}  // namespace

ScoreReservoir::ScoreReservoir(std::size_t capacity, std::uint64_t seen, std::vector<double> values)
    : capacity_(capacity), seen_(seen), values_(std::move(values)) {
  if (values_.size() > capacity_ || values_.size() > seen_)
    throw StateFormatError("score reservoir larger than its capacity");
}

void ScoreReservoir::record(double ratio) {
  ++seen_;
  if (values_.size() < capacity_) {
    values_.push_back(ratio);
    return;
  }
  const std::uint64_t slot = derive_seed(kReservoirSalt, seen_) % seen_;
  if (slot < capacity_) values_[slot] = ratio;
}

double ScoreReservoir::quantile(double p) const {
  if (values_.empty()) throw CalibrationError("no training scores recorded");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile must lie in [0, 1]");
  std::vector<double> sorted = values_;
  std::sort(sorted.begin(), sorted.end());
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

KnowledgeState::KnowledgeState(ProjectionParams projection, double ridge_lambda)
    : projection_(std::move(projection)), ridge_lambda_(ridge_lambda) {
  if (!(ridge_lambda_ > 0.0)) throw std::invalid_argument("ridge lambda must be positive");
  const auto m = static_cast<Eigen::Index>(projection_.output_dim());
  gram_ = RowMatrix::Zero(m, m);
  aggregate_ = RowMatrix::Zero(m, 0);
}

std::optional<std::size_t> KnowledgeState::column_of(ClassId id) const {
  auto it = std::lower_bound(class_ids_.begin(), class_ids_.end(), id);
  if (it == class_ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - class_ids_.begin());
}

Vector KnowledgeState::prototype(ClassId id) const {
  const auto col = column_of(id);
  if (!col) throw std::out_of_range("no prototype for class " + std::to_string(id));
  return aggregate_.col(static_cast<Eigen::Index>(*col)) / static_cast<double>(class_counts_[*col]);
}

RowMatrix KnowledgeState::prototype_rows() const {
  RowMatrix rows(static_cast<Eigen::Index>(num_classes()), aggregate_.rows());
  for (std::size_t k = 0; k < num_classes(); ++k)
    rows.row(static_cast<Eigen::Index>(k)) =
        aggregate_.col(static_cast<Eigen::Index>(k)).transpose() / static_cast<double>(class_counts_[k]);
  return rows;
}

std::vector<ClassId> KnowledgeState::checked_ids(std::span<const Label> labels, Eigen::Index rows) const {
  if (static_cast<std::size_t>(rows) != labels.size())
    throw DimensionError("feature rows and labels differ in length");
  std::vector<ClassId> ids;
  ids.reserve(labels.size());
  for (const auto& l : labels) {
    if (l.is_open()) throw std::invalid_argument("open marker cannot be trained on");
    ids.push_back(l.id());
  }
  return ids;
}

void KnowledgeState::update_gram_and_aggregates(const RowMatrix& features, std::span<const Label> labels) {
  if (static_cast<std::size_t>(features.cols()) != feature_dim())
    throw DimensionError("features have " + std::to_string(features.cols()) + " columns, state expects " +
                         std::to_string(feature_dim()));
  const auto ids = checked_ids(labels, features.rows());
  if (ids.empty()) return;

  std::vector<ClassId> merged = class_ids_;
  merged.insert(merged.end(), ids.begin(), ids.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  if (merged.size() != class_ids_.size()) {
    RowMatrix grown = RowMatrix::Zero(aggregate_.rows(), static_cast<Eigen::Index>(merged.size()));
    std::vector<std::uint64_t> counts(merged.size(), 0);
    for (std::size_t k = 0; k < class_ids_.size(); ++k) {
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(merged.begin(), merged.end(), class_ids_[k]) - merged.begin());
      grown.col(static_cast<Eigen::Index>(pos)) = aggregate_.col(static_cast<Eigen::Index>(k));
      counts[pos] = class_counts_[k];
    }
    aggregate_ = std::move(grown);
    class_counts_ = std::move(counts);
    class_ids_ = std::move(merged);
  }

  kernels::parallel::gram_update(kernels::view(features), kernels::mutable_view(gram_));
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    const auto col = static_cast<Eigen::Index>(*column_of(ids[static_cast<std::size_t>(r)]));
    aggregate_.col(col) += features.row(r).transpose();
    ++class_counts_[static_cast<std::size_t>(col)];
  }
  total_count_ += ids.size();
}

void KnowledgeState::update_delta(const RowMatrix& features, std::span<const Label> labels) {
  if (static_cast<std::size_t>(features.cols()) != feature_dim())
    throw DimensionError("features do not match the state's projected dimension");
  const auto ids = checked_ids(labels, features.rows());
  if (ids.empty()) return;
  std::vector<std::size_t> centre(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto col = column_of(ids[i]);
    if (!col) throw std::out_of_range("no prototype for class " + std::to_string(ids[i]));
    centre[i] = *col;
  }
  const RowMatrix prototypes = prototype_rows();
  std::vector<double> dist(ids.size());
  kernels::parallel::squared_distances(kernels::view(features), kernels::view(prototypes), centre, dist);
  double batch_sum = 0.0;
  for (double d : dist) batch_sum += d;
  const double n = static_cast<double>(ids.size());
  const double batch_msd = batch_sum / n;
  const double prev = static_cast<double>(delta_count_);
  delta_sq_ = (delta_sq_ * prev + batch_msd * n) / (prev + n);
  delta_count_ += ids.size();
}

RowMatrix ridge_solve(const RowMatrix& gram, double lambda, const RowMatrix& rhs) {
  if (gram.rows() != gram.cols() || rhs.rows() != gram.rows())
    throw DimensionError("ridge system and right-hand side do not match");
  Eigen::MatrixXd system = gram;
  system.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) throw SolveError("G + lambda I is not positive definite");
  const double rcond = llt.rcond();
  if (!(rcond > 1.0 / kMaxCondition))
    throw SolveError("G + lambda I is ill-conditioned (condition estimate " + std::to_string(1.0 / rcond) + ")");
  return llt.solve(Eigen::MatrixXd(rhs));
}

RowMatrix KnowledgeState::decode_weights() const {
  if (num_classes() == 0) throw std::logic_error("decode_weights needs at least one class");
  // Solve against the aggregate columns, not the class means: G sums over
  // every sample, so a mean target would scale class y's scores by 1/n_y.
  return ridge_solve(gram_, ridge_lambda_, aggregate_);
}

double KnowledgeState::mean_training_score(const RowMatrix& weights) const {
  if (weights.rows() != aggregate_.rows() || weights.cols() != aggregate_.cols())
    throw DimensionError("weights do not match the class aggregate shape");
  if (total_count_ == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < aggregate_.cols(); ++k) sum += aggregate_.col(k).dot(weights.col(k));
  return sum / static_cast<double>(total_count_);
}

void KnowledgeState::set_ridge_lambda(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge lambda must be positive");
  ridge_lambda_ = lambda;
}

void KnowledgeState::set_threshold_ratio(double r) {
  if (!std::isfinite(r)) throw CalibrationError("threshold ratio must be finite");
  threshold_ratio_ = r;
  calibrated_ = true;
}

}  // namespace owcl

namespace owcl {

std::vector<double> ridge_lambda_grid() {
  std::vector<double> grid;
  for (int e = -4; e <= 4; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

double select_ridge_lambda(const KnowledgeState& state, const RowMatrix& features, std::span<const Label> labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw DimensionError("feature rows and labels differ in length");
  if (features.rows() < 4) return state.ridge_lambda();

  std::vector<Eigen::Index> fit_rows, hold_rows;
  for (Eigen::Index r = 0; r < features.rows(); ++r) (r % 4 == 3 ? hold_rows : fit_rows).push_back(r);
  RowMatrix fit(static_cast<Eigen::Index>(fit_rows.size()), features.cols());
  std::vector<Label> fit_labels;
  for (std::size_t i = 0; i < fit_rows.size(); ++i) {
    fit.row(static_cast<Eigen::Index>(i)) = features.row(fit_rows[i]);
    fit_labels.push_back(labels[static_cast<std::size_t>(fit_rows[i])]);
  }
  KnowledgeState trial = state;
  trial.update_gram_and_aggregates(fit, fit_labels);

  // Held-out classes unseen in the fit rows have no column; their target row
  // stays all-zero.
  RowMatrix hold(static_cast<Eigen::Index>(hold_rows.size()), features.cols());
  RowMatrix targets = RowMatrix::Zero(hold.rows(), static_cast<Eigen::Index>(trial.num_classes()));
  for (std::size_t i = 0; i < hold_rows.size(); ++i) {
    hold.row(static_cast<Eigen::Index>(i)) = features.row(hold_rows[i]);
    const Label& l = labels[static_cast<std::size_t>(hold_rows[i])];
    if (l.is_open()) throw std::invalid_argument("open marker cannot be trained on");
    if (auto col = trial.column_of(l.id())) targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*col)) = 1.0;
  }

  double best_lambda = state.ridge_lambda();
  double best_residual = std::numeric_limits<double>::infinity();
  for (double lambda : ridge_lambda_grid()) {
    RowMatrix weights;
    try {
      weights = ridge_solve(trial.gram(), lambda, trial.class_aggregate());
    } catch (const SolveError&) {
      continue;
    }
    const double residual = (hold * weights - targets).squaredNorm();
    if (residual < best_residual) {
      best_residual = residual;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace owcl
