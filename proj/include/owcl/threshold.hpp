#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "owcl/dap.hpp"
#include "owcl/knowledge_state.hpp"

namespace owcl {

struct SearchConfig {
  double lo = 0.0;
  double hi = 1.0;
  double epsilon = 1e-3;
  std::size_t max_iters = 200;
};

struct SearchResult {
  double argmax = 0.0;
  double value = 0.0;
  std::size_t iterations = 0;
};

/// Ternary search for the maximiser of f on [lo, hi]. Keeps the better two
/// thirds each round; when the probes tie both outer thirds are dropped.
/// Stops once the interval is no wider than epsilon (or after max_iters) and
/// returns its midpoint.
SearchResult ternary_search(const std::function<double(double)>& f, const SearchConfig& config);

/// ceil(log_{3/2}(range / epsilon)) + 1.
std::size_t ternary_iteration_bound(double range, double epsilon);

/// Calibration samples reduced to their best scores.
struct ScoredCalibration {
  std::vector<double> scores;
  std::vector<SurrogateTag> tags;
};

/// s_z = max_y z^T w_y for each (already projected) pseudo-sample.
ScoredCalibration score_calibration_set(const CalibrationSet& calib, const RowMatrix& weights);

/// Share of samples on the correct side of r * train_score_mean: known
/// surrogates at or above it, open surrogates strictly below.
double objective(double r, const ScoredCalibration& scored, double train_score_mean);
double objective(double r, const CalibrationSet& calib, const KnowledgeState& state);

/// Search interval [min s_z, max s_z] / train_score_mean.
SearchConfig search_interval(const ScoredCalibration& scored, double train_score_mean, double epsilon,
                             std::size_t max_iters);

/// Sets state's threshold ratio to the ternary-search maximiser of the
/// objective. G, C, prototypes and delta are left untouched. Throws
/// CalibrationError (keeping the previous r) when train_score_mean is zero or
/// the set is empty.
SearchResult calibrate(KnowledgeState& state, const CalibrationSet& calib, const RowMatrix& weights,
                       double epsilon = 1e-3, std::size_t max_iters = 200);
SearchResult calibrate(KnowledgeState& state, const CalibrationSet& calib, double epsilon = 1e-3,
                       std::size_t max_iters = 200);

}  // namespace owcl
