#pragma once

#include <optional>
#include <span>
#include <vector>

#include "owcl/knowledge_state.hpp"

namespace owcl {

/// Known(class) or open.
class Verdict {
public:
  static Verdict open() { return Verdict{}; }
  static Verdict known(ClassId id) { return Verdict{id}; }

  bool is_open() const { return !cls_.has_value(); }
  ClassId known_class() const { return cls_.value(); }

  friend bool operator==(const Verdict&, const Verdict&) = default;

private:
  Verdict() = default;
  explicit Verdict(ClassId id) : cls_(id) {}
  std::optional<ClassId> cls_;
};

struct ScoredSample {
  std::vector<double> scores;  // one per class, in class-id order
  ClassId best_class = 0;
  double best_score = 0.0;
  Verdict verdict = Verdict::open();
};

/// scores[y] = h^T weights[:, y].
std::vector<double> score(std::span<const double> h, const RowMatrix& weights);

/// Builds the ScoredSample for precomputed scores: argmax with lowest-id
/// tie-break, open iff best_score < cutoff.
ScoredSample decide(std::vector<double> scores, std::span<const ClassId> class_ids, double cutoff);

/// r * mean training score. Throws UncalibratedError when r was never set.
double calibrated_cutoff(const KnowledgeState& state);
/// quantile(p) of recorded best-score ratios, scaled by the current mean
/// training score. The MaxLogits-like cutoff used when DAPs are ablated.
double percentile_cutoff(const KnowledgeState& state, double percentile);

/// Projects x, scores it against `weights` (decode_weights of `state`) and
/// applies the calibrated cutoff.
ScoredSample classify(std::span<const double> x, const KnowledgeState& state, const RowMatrix& weights);
ScoredSample classify(std::span<const double> x, const KnowledgeState& state);

/// Same scores as classify; the cutoff is a percentile of training best scores.
ScoredSample classify_ablated(std::span<const double> x, const KnowledgeState& state, const RowMatrix& weights,
                              double percentile);
ScoredSample classify_ablated(std::span<const double> x, const KnowledgeState& state, double percentile);

/// Row-wise classification of raw samples under a given cutoff.
std::vector<ScoredSample> classify_batch(const RowMatrix& raw, const KnowledgeState& state,
                                         const RowMatrix& weights, double cutoff);

/// Score matrix (n x K) for already projected rows.
RowMatrix score_rows(const RowMatrix& projected, const RowMatrix& weights);

}  // namespace owcl
