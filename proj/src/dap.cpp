#include "owcl/dap.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <tuple>

#include "owcl/rng.hpp"

namespace owcl {

namespace {

// Stream ids for derive_seed; keep positives, negatives and the shuffle apart.
constexpr std::uint64_t kPositiveStream = 0x100000;
constexpr std::uint64_t kNegativeStream = 0x200000;
constexpr std::uint64_t kShuffleStream = 0x300000;

Vector gaussian_around(const Vector& mean, double sd, Rng& rng) {
  Vector v(mean.size());
  for (Eigen::Index j = 0; j < mean.size(); ++j) v(j) = mean(j) + sd * rng.normal();
  return v;
}

}  // namespace

std::size_t CalibrationSet::count(SurrogateTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [tag](const PseudoSample& s) { return s.tag == tag; }));
}

Vector pseudo_prototype(const Vector& p_k, const Vector& p_l, double zeta) {
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
  if (p_k.size() != p_l.size()) throw DimensionError("prototype lengths differ");
  return (p_k + zeta * p_l) / (1.0 + zeta);
}

std::vector<PseudoSample> generate_positive(ClassId class_id, const Vector& p_k, double delta_sq, std::size_t n,
                                            std::uint64_t seed) {
  if (delta_sq < 0.0) throw std::invalid_argument("delta_sq must be non-negative");
  const double sd = std::sqrt(delta_sq);
  Rng rng(seed);
  std::vector<PseudoSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({gaussian_around(p_k, sd, rng), SurrogateTag::known_surrogate, {class_id, std::nullopt, 0.0}});
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> select_pairs(const RowMatrix& prototypes, std::size_t max_pairs) {
  const auto k = static_cast<std::size_t>(prototypes.rows());
  struct Candidate {
    double dist;
    std::size_t a, b;
  };
  std::vector<Candidate> all;
  all.reserve(k * (k - (k > 0)) / 2);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      all.push_back({(prototypes.row(static_cast<Eigen::Index>(a)) - prototypes.row(static_cast<Eigen::Index>(b)))
                         .squaredNorm(),
                     a, b});
  if (all.size() > max_pairs) {
    std::stable_sort(all.begin(), all.end(), [](const Candidate& x, const Candidate& y) { return x.dist < y.dist; });
    all.resize(max_pairs);
    std::sort(all.begin(), all.end(),
              [](const Candidate& x, const Candidate& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(all.size());
  for (const auto& c : all) out.emplace_back(c.a, c.b);
  return out;
}

std::vector<PseudoSample> generate_negative(std::span<const ClassId> class_ids, const RowMatrix& prototypes,
                                            double delta_sq, std::size_t n_per_pair,
                                            std::pair<double, double> zeta_range, std::uint64_t seed,
                                            std::size_t max_pairs) {
  if (prototypes.rows() < 2) throw CalibrationError("negative pseudo-samples need at least two prototypes");
  if (class_ids.size() != static_cast<std::size_t>(prototypes.rows()))
    throw DimensionError("class ids and prototypes differ in count");
  const auto [lo, hi] = zeta_range;
  if (!(lo > 0.0) || !(lo <= hi)) throw std::invalid_argument("zeta range must satisfy 0 < lo <= hi");
  if (delta_sq < 0.0) throw std::invalid_argument("delta_sq must be non-negative");

  const double sd = std::sqrt(delta_sq);
  const auto pairs = select_pairs(prototypes, max_pairs);
  std::vector<PseudoSample> out;
  out.reserve(pairs.size() * n_per_pair);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [a, b] = pairs[p];
    const Vector pa = prototypes.row(static_cast<Eigen::Index>(a)).transpose();
    const Vector pb = prototypes.row(static_cast<Eigen::Index>(b)).transpose();
    Rng rng(derive_seed(seed, p));
    for (std::size_t i = 0; i < n_per_pair; ++i) {
      const double zeta = rng.uniform(lo, hi);
      out.push_back({gaussian_around(pseudo_prototype(pa, pb, zeta), sd, rng), SurrogateTag::open_surrogate,
                     {class_ids[a], class_ids[b], zeta}});
    }
  }
  return out;
}

double calibration_variance(const KnowledgeState& state) {
  return state.delta_sq() / static_cast<double>(state.feature_dim());
}

CalibrationSet build_calibration_set(const KnowledgeState& state, const DapConfig& config) {
  if (state.num_classes() < 2) throw CalibrationError("calibration needs at least two classes");
  const RowMatrix prototypes = state.prototype_rows();
  // delta_sq is a squared distance over all M coordinates; spread it evenly
  // so pseudo-samples sit as far from their centre as real samples do.
  const double variance = calibration_variance(state);
  CalibrationSet set;
  set.seed = config.seed;
  for (std::size_t k = 0; k < state.num_classes(); ++k) {
    auto pos = generate_positive(state.class_ids()[k], prototypes.row(static_cast<Eigen::Index>(k)).transpose(),
                                 variance, config.positives_per_class,
                                 derive_seed(config.seed, kPositiveStream + k));
    std::move(pos.begin(), pos.end(), std::back_inserter(set.samples));
  }
  auto neg = generate_negative(state.class_ids(), prototypes, variance, config.negatives_per_pair,
                               {config.zeta_lo, config.zeta_hi}, derive_seed(config.seed, kNegativeStream),
                               config.max_pairs);
  std::move(neg.begin(), neg.end(), std::back_inserter(set.samples));

  Rng rng(derive_seed(config.seed, kShuffleStream));
  for (std::size_t i = set.samples.size(); i > 1; --i) std::swap(set.samples[i - 1], set.samples[rng.below(i)]);
  return set;
}

}  // namespace owcl
