#include "owcl/threshold.hpp"

#include <algorithm>
#include <cmath>

#include "owcl/kernels.hpp"
#include "owcl/scorer.hpp"

namespace owcl {

SearchResult ternary_search(const std::function<double(double)>& f, const SearchConfig& config) {
  if (!(config.lo <= config.hi))
    throw std::invalid_argument("search interval must satisfy lo <= hi");
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  double lo = config.lo;
  double hi = config.hi;
  std::size_t iters = 0;
  while (hi - lo > config.epsilon && iters < config.max_iters) {
    const double third = (hi - lo) / 3.0;
    const double m1 = lo + third;
    const double m2 = hi - third;
    const double f1 = f(m1);
    const double f2 = f(m2);
    if (f1 < f2) {
      lo = m1;
    } else if (f1 > f2) {
      hi = m2;
    } else {
      lo = m1;
      hi = m2;
    }
    ++iters;
  }
  const double mid = 0.5 * (lo + hi);
  return {mid, f(mid), iters};
}

std::size_t ternary_iteration_bound(double range, double epsilon) {
  if (range <= epsilon) return 1;
  return static_cast<std::size_t>(std::ceil(std::log(range / epsilon) / std::log(1.5))) + 1;
}

ScoredCalibration score_calibration_set(const CalibrationSet& calib, const RowMatrix& weights) {
  ScoredCalibration out;
  const auto n = calib.samples.size();
  out.scores.resize(n);
  out.tags.resize(n);
  if (n == 0) return out;
  RowMatrix z(static_cast<Eigen::Index>(n), weights.rows());
  for (std::size_t i = 0; i < n; ++i) {
    if (calib.samples[i].vector.size() != weights.rows()) throw DimensionError("pseudo-sample width mismatch");
    z.row(static_cast<Eigen::Index>(i)) = calib.samples[i].vector.transpose();
    out.tags[i] = calib.samples[i].tag;
  }
  const RowMatrix scores = score_rows(z, weights);
  for (std::size_t i = 0; i < n; ++i) out.scores[i] = scores.row(static_cast<Eigen::Index>(i)).maxCoeff();
  return out;
}

double objective(double r, const ScoredCalibration& scored, double train_score_mean) {
  if (scored.scores.empty()) throw CalibrationError("empty calibration set");
  const double cutoff = r * train_score_mean;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scored.scores.size(); ++i) {
    const bool accepted = !(scored.scores[i] < cutoff);
    if (accepted == (scored.tags[i] == SurrogateTag::known_surrogate)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scored.scores.size());
}

double objective(double r, const CalibrationSet& calib, const KnowledgeState& state) {
  if (calib.samples.empty()) throw CalibrationError("empty calibration set");
  return objective(r, score_calibration_set(calib, state.decode_weights()), state.train_score_mean());
}

SearchConfig search_interval(const ScoredCalibration& scored, double train_score_mean, double epsilon,
                             std::size_t max_iters) {
  if (scored.scores.empty()) throw CalibrationError("empty calibration set");
  if (train_score_mean == 0.0 || !std::isfinite(train_score_mean))
    throw CalibrationError("mean training score is zero; threshold ratio is undefined");
  const auto [mn, mx] = std::minmax_element(scored.scores.begin(), scored.scores.end());
  const double a = *mn / train_score_mean;
  const double b = *mx / train_score_mean;
  return {std::min(a, b), std::max(a, b), epsilon, max_iters};
}

SearchResult calibrate(KnowledgeState& state, const CalibrationSet& calib, const RowMatrix& weights,
                       double epsilon, std::size_t max_iters) {
  if (calib.samples.empty()) throw CalibrationError("empty calibration set");
  const ScoredCalibration scored = score_calibration_set(calib, weights);
  const double mean = state.train_score_mean();
  const SearchConfig config = search_interval(scored, mean, epsilon, max_iters);
  const SearchResult result = ternary_search([&](double r) { return objective(r, scored, mean); }, config);
  state.set_threshold_ratio(result.argmax);
  return result;
}

SearchResult calibrate(KnowledgeState& state, const CalibrationSet& calib, double epsilon, std::size_t max_iters) {
  return calibrate(state, calib, state.decode_weights(), epsilon, max_iters);
}

}  // namespace owcl
