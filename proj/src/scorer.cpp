#include "owcl/scorer.hpp"

#include "owcl/kernels.hpp"

namespace owcl {

std::vector<double> score(std::span<const double> h, const RowMatrix& weights) {
  if (h.size() != static_cast<std::size_t>(weights.rows()))
    throw DimensionError("feature length " + std::to_string(h.size()) + " != weight rows " +
                         std::to_string(weights.rows()));
  std::vector<double> out(static_cast<std::size_t>(weights.cols()), 0.0);
  kernels::serial::multiply({h.data(), 1, h.size()}, kernels::view(weights),
                            {out.data(), 1, out.size()});
  return out;
}

ScoredSample decide(std::vector<double> scores, std::span<const ClassId> class_ids, double cutoff) {
  if (scores.empty() || scores.size() != class_ids.size())
    throw DimensionError("scores must be non-empty and match the class list");
  ScoredSample s;
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  s.best_class = class_ids[best];
  s.best_score = scores[best];
  s.verdict = s.best_score < cutoff ? Verdict::open() : Verdict::known(s.best_class);
  s.scores = std::move(scores);
  return s;
}

double calibrated_cutoff(const KnowledgeState& state) {
  if (!state.calibrated()) throw UncalibratedError("threshold ratio has not been calibrated");
  return state.threshold_ratio() * state.train_score_mean();
}

double percentile_cutoff(const KnowledgeState& state, double percentile) {
  return state.score_reservoir().quantile(percentile) * state.train_score_mean();
}

ScoredSample classify(std::span<const double> x, const KnowledgeState& state, const RowMatrix& weights) {
  const double cutoff = calibrated_cutoff(state);
  const Vector h = project(x, state.projection());
  return decide(score({h.data(), static_cast<std::size_t>(h.size())}, weights), state.class_ids(), cutoff);
}

ScoredSample classify(std::span<const double> x, const KnowledgeState& state) {
  calibrated_cutoff(state);
  return classify(x, state, state.decode_weights());
}

ScoredSample classify_ablated(std::span<const double> x, const KnowledgeState& state, const RowMatrix& weights,
                              double percentile) {
  const double cutoff = percentile_cutoff(state, percentile);
  const Vector h = project(x, state.projection());
  return decide(score({h.data(), static_cast<std::size_t>(h.size())}, weights), state.class_ids(), cutoff);
}

ScoredSample classify_ablated(std::span<const double> x, const KnowledgeState& state, double percentile) {
  return classify_ablated(x, state, state.decode_weights(), percentile);
}

RowMatrix score_rows(const RowMatrix& projected, const RowMatrix& weights) {
  if (projected.cols() != weights.rows()) throw DimensionError("projected width != weight rows");
  RowMatrix out(projected.rows(), weights.cols());
  kernels::parallel::multiply(kernels::view(projected), kernels::view(weights), kernels::mutable_view(out));
  return out;
}

std::vector<ScoredSample> classify_batch(const RowMatrix& raw, const KnowledgeState& state,
                                         const RowMatrix& weights, double cutoff) {
  const RowMatrix scores = score_rows(project(raw, state.projection()), weights);
  std::vector<ScoredSample> out;
  out.reserve(static_cast<std::size_t>(raw.rows()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    std::vector<double> row(scores.row(r).data(), scores.row(r).data() + scores.cols());
    out.push_back(decide(std::move(row), state.class_ids(), cutoff));
  }
  return out;
}

}  // namespace owcl
