#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "owcl/knowledge_state.hpp"

namespace owcl {

enum class SurrogateTag { known_surrogate, open_surrogate };

/// Positives name one class; negatives name the ordered pair (first, second)
/// and the zeta their pseudo-prototype was built with.
struct PseudoSource {
  ClassId first = 0;
  std::optional<ClassId> second;
  double zeta = 0.0;
};

/// A calibration-only sample in projected space.
struct PseudoSample {
  Vector vector;
  SurrogateTag tag = SurrogateTag::known_surrogate;
  PseudoSource source;
};

struct CalibrationSet {
  std::vector<PseudoSample> samples;
  std::uint64_t seed = 0;

  std::size_t count(SurrogateTag tag) const;
};

struct DapConfig {
  std::size_t positives_per_class = 64;
  std::size_t negatives_per_pair = 16;
  double zeta_lo = 0.5;
  double zeta_hi = 2.0;
  std::size_t max_pairs = 512;
  std::uint64_t seed = 0;
};

/// (p_k + zeta p_l) / (1 + zeta); zeta > 0.
Vector pseudo_prototype(const Vector& p_k, const Vector& p_l, double zeta);

/// n draws from N(p_k, delta_sq I).
std::vector<PseudoSample> generate_positive(ClassId class_id, const Vector& p_k, double delta_sq, std::size_t n,
                                            std::uint64_t seed);

/// Unordered prototype pairs (row indices, first < second). All pairs when
/// there are at most `max_pairs`, otherwise the `max_pairs` closest by
/// Euclidean distance (ties by index order).
std::vector<std::pair<std::size_t, std::size_t>> select_pairs(const RowMatrix& prototypes, std::size_t max_pairs);

/// For each selected pair, n_per_pair draws from N(p_kl, delta_sq I) with
/// zeta ~ U[lo, hi] drawn per sample. `prototypes` holds one prototype per row.
std::vector<PseudoSample> generate_negative(std::span<const ClassId> class_ids, const RowMatrix& prototypes,
                                            double delta_sq, std::size_t n_per_pair,
                                            std::pair<double, double> zeta_range, std::uint64_t seed,
                                            std::size_t max_pairs = 512);

/// Per-coordinate variance of the calibration draws: delta_sq / M, so the
/// expected squared distance of a draw to its centre equals delta_sq.
double calibration_variance(const KnowledgeState& state);

/// Positives for every class plus negatives for the selected pairs, shuffled
/// under config.seed. Throws CalibrationError with fewer than two classes.
CalibrationSet build_calibration_set(const KnowledgeState& state, const DapConfig& config);

}  // namespace owcl
