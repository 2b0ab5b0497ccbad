#include <map>
#include <set>

#include "doctest.h"
#include "owcl/dap.hpp"
#include "owcl/scorer.hpp"
#include "owcl/threshold.hpp"
#include "test_util.hpp"

using namespace owcl;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

KnowledgeState clustered_state(std::size_t classes, std::uint64_t seed, std::size_t m = 60) {
  KnowledgeState s(init_projection(6, m, seed), 1.0);
  Rng rng(seed);
  RowMatrix x(static_cast<Eigen::Index>(classes * 40), 6);
  std::vector<Label> lab;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i) % classes;
    for (Eigen::Index j = 0; j < 6; ++j) x(i, j) = rng.normal() + (j == static_cast<Eigen::Index>(k % 6) ? 8.0 : 0.0) +
                                                    (k >= 6 && j == 0 ? -8.0 : 0.0);
    lab.push_back(Label::known(static_cast<ClassId>(k)));
  }
  const RowMatrix h = project(x, s.projection());
  s.update_gram_and_aggregates(h, lab);
  s.update_delta(h, lab);
  s.set_train_score_mean(s.mean_training_score(s.decode_weights()));
  return s;
}

}  // namespace

TEST_CASE("pseudo prototype formula") {
  const Vector a = vec({0, 0}), b = vec({3, 3});
  CHECK(pseudo_prototype(a, b, 2.0) == vec({2, 2}));
  CHECK(pseudo_prototype(a, b, 1.0) == vec({1.5, 1.5}));
  CHECK((pseudo_prototype(a, b, 1e-12) - a).norm() < 1e-11);
  CHECK_THROWS(pseudo_prototype(a, b, 0.0));
  CHECK_THROWS(pseudo_prototype(a, vec({1}), 1.0));
}

TEST_CASE("pseudo prototype is a convex combination") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vector a = vec({rng.normal(), rng.normal()}), b = vec({rng.normal(), rng.normal()});
    const double z = rng.uniform(0.01, 50.0);
    const Vector p = pseudo_prototype(a, b, z);
    const double t = z / (1.0 + z);
    CHECK(t > 0.0);
    CHECK(t < 1.0);
    CHECK((p - ((1 - t) * a + t * b)).norm() <= 1e-12 * (1 + a.norm() + b.norm()));
  }
}

TEST_CASE("positives") {
  const Vector p = vec({1.0, -2.0, 0.5});
  SUBCASE("zero variance") {
    for (const auto& s : generate_positive(3, p, 0.0, 5, 1)) {
      CHECK(s.vector == p);
      CHECK(s.tag == SurrogateTag::known_surrogate);
      CHECK(s.source.first == 3);
      CHECK_FALSE(s.source.second.has_value());
    }
  }
  SUBCASE("none requested") { CHECK(generate_positive(0, p, 1.0, 0, 1).empty()); }
  SUBCASE("empirical mean and spread") {
    const auto draws = generate_positive(0, p, 1.0, 10000, 7);
    Vector mean = Vector::Zero(3);
    for (const auto& d : draws) mean += d.vector;
    mean /= 10000.0;
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(mean(j) - p(j)) <= 4.0 / std::sqrt(10000.0));
    double var = 0;
    for (const auto& d : draws) var += (d.vector - p).squaredNorm();
    CHECK(var / (3 * 10000.0) == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("seeded") {
    const auto a = generate_positive(1, p, 2.0, 20, 5), b = generate_positive(1, p, 2.0, 20, 5);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].vector == b[i].vector);
  }
}

TEST_CASE("negatives") {
  SUBCASE("noise-free midpoint") {
    RowMatrix protos(2, 2);
    protos << 0, 0, 2, 4;
    const std::vector<ClassId> ids{5, 8};
    const auto neg = generate_negative(ids, protos, 0.0, 1, {1.0, 1.0}, 3);
    REQUIRE(neg.size() == 1);
    CHECK(neg[0].vector == vec({1, 2}));
    CHECK(neg[0].tag == SurrogateTag::open_surrogate);
    CHECK(neg[0].source.first == 5);
    CHECK(*neg[0].source.second == 8);
    CHECK(neg[0].source.zeta == 1.0);
  }
  SUBCASE("uncapped count is K(K-1)/2 per pair") {
    for (std::size_t k = 2; k <= 7; ++k) {
      RowMatrix protos = test::gaussian(static_cast<Eigen::Index>(k), 4, k);
      std::vector<ClassId> ids(k);
      for (std::size_t i = 0; i < k; ++i) ids[i] = static_cast<ClassId>(i);
      CHECK(generate_negative(ids, protos, 1.0, 3, {0.5, 2.0}, 1).size() == k * (k - 1) / 2 * 3);
    }
  }
  SUBCASE("collinear prototypes stay inside the segment hull") {
    RowMatrix protos(3, 2);
    protos << 0, 0, 1, 0, 5, 0;
    const std::vector<ClassId> ids{0, 1, 2};
    for (const auto& s : generate_negative(ids, protos, 0.0, 50, {0.5, 2.0}, 9)) {
      CHECK(s.vector(1) == 0.0);
      CHECK(s.vector(0) > 0.0);
      CHECK(s.vector(0) < 5.0);
      CHECK(s.source.zeta >= 0.5);
      CHECK(s.source.zeta <= 2.0);
      CHECK(s.source.first != *s.source.second);
      // strictly between its own two sources
      const double lo = std::min(protos(s.source.first, 0), protos(*s.source.second, 0));
      const double hi = std::max(protos(s.source.first, 0), protos(*s.source.second, 0));
      CHECK(s.vector(0) > lo);
      CHECK(s.vector(0) < hi);
    }
  }
  SUBCASE("fewer than two prototypes") {
    RowMatrix one(1, 2);
    one << 1, 1;
    const std::vector<ClassId> ids{0};
    CHECK_THROWS_AS(generate_negative(ids, one, 1.0, 2, {0.5, 2.0}, 1), CalibrationError);
  }
  SUBCASE("bad zeta range") {
    RowMatrix protos = test::gaussian(2, 2, 1);
    const std::vector<ClassId> ids{0, 1};
    CHECK_THROWS(generate_negative(ids, protos, 1.0, 2, {0.0, 2.0}, 1));
    CHECK_THROWS(generate_negative(ids, protos, 1.0, 2, {2.0, 1.0}, 1));
  }
}

TEST_CASE("pair selection keeps the closest pairs") {
  RowMatrix protos = test::gaussian(40, 3, 2);
  const auto all = select_pairs(protos, 10000);
  CHECK(all.size() == 40 * 39 / 2);
  const auto capped = select_pairs(protos, 50);
  REQUIRE(capped.size() == 50);
  double worst_kept = 0;
  std::set<std::pair<std::size_t, std::size_t>> kept(capped.begin(), capped.end());
  for (auto [a, b] : capped) {
    CHECK(a < b);
    worst_kept = std::max(worst_kept, (protos.row(a) - protos.row(b)).norm());
  }
  for (auto [a, b] : all)
    if (!kept.count({a, b})) CHECK((protos.row(a) - protos.row(b)).norm() >= worst_kept);
}

TEST_CASE("calibration set composition") {
  auto s = clustered_state(2, 1);
  DapConfig cfg;
  cfg.positives_per_class = 4;
  cfg.negatives_per_pair = 2;
  cfg.seed = 11;
  const auto set = build_calibration_set(s, cfg);
  CHECK(set.samples.size() == 10);
  CHECK(set.count(SurrogateTag::known_surrogate) == 8);
  CHECK(set.count(SurrogateTag::open_surrogate) == 2);
  CHECK(set.seed == 11);

  const auto again = build_calibration_set(s, cfg);
  for (std::size_t i = 0; i < set.samples.size(); ++i) CHECK(set.samples[i].vector == again.samples[i].vector);

  auto s5 = clustered_state(5, 2);
  cfg.positives_per_class = 7;
  cfg.negatives_per_pair = 3;
  CHECK(build_calibration_set(s5, cfg).samples.size() == 5 * 7 + 10 * 3);
  cfg.max_pairs = 4;
  CHECK(build_calibration_set(s5, cfg).samples.size() == 5 * 7 + 4 * 3);

  CHECK_THROWS_AS(build_calibration_set(clustered_state(1, 3), cfg), CalibrationError);
}

TEST_CASE("calibration leaves training statistics alone") {
  auto s = clustered_state(3, 4);
  const auto before = s;
  DapConfig cfg;
  cfg.seed = 3;
  const auto set = build_calibration_set(s, cfg);
  CHECK(s == before);
  calibrate(s, set);
  CHECK(s.gram() == before.gram());
  CHECK(s.class_aggregate() == before.class_aggregate());
  CHECK(s.delta_sq() == before.delta_sq());
  CHECK(s.class_counts() == before.class_counts());
}

TEST_CASE("known surrogates outscore open surrogates on a trained state") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto s = clustered_state(4, seed);
    DapConfig cfg;
    cfg.seed = seed;
    const auto set = build_calibration_set(s, cfg);
    const auto scored = score_calibration_set(set, s.decode_weights());
    double known = 0, open = 0;
    for (std::size_t i = 0; i < scored.scores.size(); ++i)
      (scored.tags[i] == SurrogateTag::known_surrogate ? known : open) += scored.scores[i];
    known /= static_cast<double>(set.count(SurrogateTag::known_surrogate));
    open /= static_cast<double>(set.count(SurrogateTag::open_surrogate));
    CHECK(known > open);
  }
}

TEST_CASE("calibration draws spread like the training data") {
  auto s = clustered_state(3, 6, 200);
  CHECK(calibration_variance(s) == doctest::Approx(s.delta_sq() / 200.0));
  DapConfig cfg;
  cfg.positives_per_class = 400;
  cfg.negatives_per_pair = 0;
  cfg.seed = 1;
  const auto set = build_calibration_set(s, cfg);
  double msd = 0;
  for (const auto& p : set.samples) msd += (p.vector - s.prototype(p.source.first)).squaredNorm();
  msd /= static_cast<double>(set.samples.size());
  CHECK(msd == doctest::Approx(s.delta_sq()).epsilon(0.05));
}
