#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "owcl/nrp.hpp"
#include "owcl/types.hpp"

namespace owcl {

/// Bounded, deterministic reservoir of training best-score ratios
/// (best score / mean training score at the time the sample was trained).
/// Backs the percentile cutoff of the no-DAP ablation.
class ScoreReservoir {
public:
  static constexpr std::size_t kDefaultCapacity = 8192;

  explicit ScoreReservoir(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {}
  ScoreReservoir(std::size_t capacity, std::uint64_t seen, std::vector<double> values);

  void record(double ratio);
  /// Linear-interpolated quantile, p in [0, 1]. Throws CalibrationError if empty.
  double quantile(double p) const;

  bool empty() const { return values_.empty(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t seen() const { return seen_; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const ScoreReservoir&, const ScoreReservoir&) = default;

private:
  std::size_t capacity_;
  std::uint64_t seen_ = 0;
  std::vector<double> values_;
};

/// Accumulated model: Gram matrix G = sum H^T H, class aggregates C (one
/// column per class, ordered by class id), counts, the running mean squared
/// sample-to-prototype distance and the calibrated threshold ratio.
///
/// Single writer: updates need exclusive access, const members may run
/// concurrently.
class KnowledgeState {
public:
  KnowledgeState(ProjectionParams projection, double ridge_lambda);

  const ProjectionParams& projection() const { return projection_; }
  std::size_t feature_dim() const { return projection_.output_dim(); }

  const RowMatrix& gram() const { return gram_; }
  /// M x K, column k belongs to class_ids()[k].
  const RowMatrix& class_aggregate() const { return aggregate_; }
  const std::vector<ClassId>& class_ids() const { return class_ids_; }
  const std::vector<std::uint64_t>& class_counts() const { return class_counts_; }
  std::size_t num_classes() const { return class_ids_.size(); }
  std::optional<std::size_t> column_of(ClassId id) const;

  std::uint64_t total_count() const { return total_count_; }
  double delta_sq() const { return delta_sq_; }
  std::uint64_t delta_count() const { return delta_count_; }
  double ridge_lambda() const { return ridge_lambda_; }
  double threshold_ratio() const { return threshold_ratio_; }
  bool calibrated() const { return calibrated_; }
  double train_score_mean() const { return train_score_mean_; }
  const ScoreReservoir& score_reservoir() const { return reservoir_; }

  /// p_k = C[:, k] / n_k.
  Vector prototype(ClassId id) const;
  /// All prototypes as rows (K x M), in class_ids() order.
  RowMatrix prototype_rows() const;

  /// G += H^T H; C[:, k] += sum of rows labelled k. Unseen classes get a zero
  /// column first. Rejects the open marker and dimension mismatches.
  void update_gram_and_aggregates(const RowMatrix& features, std::span<const Label> labels);

  /// Folds the batch's mean squared distance to the current prototypes into
  /// delta_sq as a count-weighted running mean. Call after
  /// update_gram_and_aggregates.
  void update_delta(const RowMatrix& features, std::span<const Label> labels);

  /// Column y = (G + lambda I)^{-1} C[:, y] from one Cholesky factorisation:
  /// the ridge fit of one-hot targets, so own-class scores sit near 1 for
  /// every class whatever its sample count.
  RowMatrix decode_weights() const;

  /// Mean over every training sample seen so far of its own-class score
  /// h^T w_y under `weights`. Equals sum_k C[:,k]^T w_k / N, so it needs no
  /// stored samples and does not depend on task order.
  double mean_training_score(const RowMatrix& weights) const;

  void set_ridge_lambda(double lambda);
  void set_train_score_mean(double mean) { train_score_mean_ = mean; }
  void set_threshold_ratio(double r);
  ScoreReservoir& score_reservoir() { return reservoir_; }

  friend bool operator==(const KnowledgeState&, const KnowledgeState&) = default;

private:
  friend KnowledgeState load_state(const std::filesystem::path& path);
  friend void save_state(const KnowledgeState& state, const std::filesystem::path& path);

  std::vector<ClassId> checked_ids(std::span<const Label> labels, Eigen::Index rows) const;

  ProjectionParams projection_;
  double ridge_lambda_;
  RowMatrix gram_;
  RowMatrix aggregate_;
  std::vector<ClassId> class_ids_;
  std::vector<std::uint64_t> class_counts_;
  std::uint64_t total_count_ = 0;
  double delta_sq_ = 0.0;
  std::uint64_t delta_count_ = 0;
  double threshold_ratio_ = 1.0;
  bool calibrated_ = false;
  double train_score_mean_ = 0.0;
  ScoreReservoir reservoir_;
};

/// (G + lambda I)^{-1} rhs through one Cholesky factorisation. Throws
/// SolveError when the system is not numerically positive definite or its
/// condition estimate exceeds 1e12.
RowMatrix ridge_solve(const RowMatrix& gram, double lambda, const RowMatrix& rhs);

/// Powers of ten 1e-4 ... 1e4 tried by select_ridge_lambda.
std::vector<double> ridge_lambda_grid();

/// Ridge parameter for the next update: fits one-hot targets on the state's
/// statistics plus three quarters of the batch and returns the grid value
/// with the smallest squared residual on the held-out quarter (every fourth
/// row). Returns the current lambda when the batch has fewer than 4 rows.
double select_ridge_lambda(const KnowledgeState& state, const RowMatrix& features, std::span<const Label> labels);

/// Binary container: magic `OWCLSTAT`, u32 version 1, little-endian fields.
void save_state(const KnowledgeState& state, const std::filesystem::path& path);
/// Throws StateFormatError on wrong magic, version or truncated content.
KnowledgeState load_state(const std::filesystem::path& path);

}  // namespace owcl
