#include <cmath>

#include "doctest.h"
#include "owcl/threshold.hpp"
#include "test_util.hpp"

using namespace owcl;

namespace {

ScoredCalibration four_sample() {
  return {{1.2, 0.9, 0.5, 0.3},
          {SurrogateTag::known_surrogate, SurrogateTag::known_surrogate, SurrogateTag::open_surrogate,
           SurrogateTag::open_surrogate}};
}

double grid_max(const std::function<double(double)>& f, double lo, double hi, std::size_t points) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points; ++i) best = std::max(best, f(lo + (hi - lo) * i / (points - 1)));
  return best;
}

}  // namespace

TEST_CASE("objective counting examples") {
  const auto sc = four_sample();
  CHECK(objective(0.7, sc, 1.0) == 1.0);
  CHECK(objective(1.0, sc, 1.0) == 0.75);
  // below every score: everything sided known
  CHECK(objective(0.1, sc, 1.0) == 0.5);
  // a score equal to the cutoff counts as known
  CHECK(objective(0.9, sc, 1.0) == 1.0);
  CHECK(objective(0.5, sc, 1.0) == 0.75);
  CHECK_THROWS_AS(objective(1.0, ScoredCalibration{}, 1.0), CalibrationError);
}

TEST_CASE("ternary search on a smooth concave function") {
  const auto r = ternary_search([](double x) { return -(x - 2) * (x - 2); }, {0, 10, 1e-6, 200});
  CHECK(std::abs(r.argmax - 2.0) <= 1e-5);
  CHECK(r.iterations <= ternary_iteration_bound(10, 1e-6));
}

TEST_CASE("ternary search on a decreasing function") {
  const auto r = ternary_search([](double x) { return -x; }, {0, 10, 1e-3, 200});
  CHECK(r.argmax <= 1e-3);
  CHECK(r.argmax >= 0.0);
}

TEST_CASE("degenerate and invalid intervals") {
  const auto r = ternary_search([](double) { return 1.0; }, {3, 3, 1e-3, 200});
  CHECK(r.argmax == 3.0);
  CHECK(r.iterations == 0);
  CHECK_THROWS(ternary_search([](double) { return 1.0; }, {4, 3, 1e-3, 200}));
  CHECK_THROWS(ternary_search([](double) { return 1.0; }, {0, 1, 0.0, 200}));
}

TEST_CASE("max_iters caps the loop") {
  const auto r = ternary_search([](double x) { return -x * x; }, {-1, 1, 1e-12, 5});
  CHECK(r.iterations == 5);
}

TEST_CASE("iteration bound formula") {
  CHECK(ternary_iteration_bound(1.0, 1.0) == 1);
  CHECK(ternary_iteration_bound(1.5, 1.0) == 2);
  CHECK(ternary_iteration_bound(10.0, 1e-3) ==
        static_cast<std::size_t>(std::ceil(std::log(1e4) / std::log(1.5))) + 1);
}

TEST_CASE("four-sample objective versus a grid") {
  const auto sc = four_sample();
  const auto cfg = search_interval(sc, 1.0, 1e-3, 200);
  CHECK(cfg.lo == 0.3);
  CHECK(cfg.hi == 1.2);
  auto f = [&](double r) { return objective(r, sc, 1.0); };
  const auto res = ternary_search(f, cfg);
  CHECK(f(res.argmax) >= grid_max(f, cfg.lo, cfg.hi, 100000) - 1e-9);
}

TEST_CASE("returned point is no worse than the final bracket ends") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const double peak = rng.uniform(0, 1);
    auto f = [&](double x) { return -std::abs(x - peak); };
    const auto res = ternary_search(f, {0, 1, 1e-4, 200});
    CHECK(f(res.argmax) >= f(peak) - 1e-4);
  }
}

TEST_CASE("separable calibration sets reach full objective") {
  Rng rng(42);
  for (int t = 0; t < 50; ++t) {
    ScoredCalibration sc;
    const double gap = rng.uniform(0.05, 0.5);
    const std::size_t nk = 20 + rng.below(200), no = 20 + rng.below(200);
    for (std::size_t i = 0; i < nk; ++i) {
      sc.scores.push_back(1.0 + gap + rng.uniform());
      sc.tags.push_back(SurrogateTag::known_surrogate);
    }
    for (std::size_t i = 0; i < no; ++i) {
      sc.scores.push_back(1.0 - rng.uniform());
      sc.tags.push_back(SurrogateTag::open_surrogate);
    }
    const auto cfg = search_interval(sc, 1.0, 1e-3, 200);
    auto f = [&](double r) { return objective(r, sc, 1.0); };
    const auto res = ternary_search(f, cfg);
    CHECK(f(res.argmax) == 1.0);
  }
}

TEST_CASE("two peaks: the search is local") {
  // global max at 0.1, a lower bump at 0.8 pulls the first probe comparison
  auto f = [](double x) { return std::max(1.0 - 20 * std::abs(x - 0.1), 0.5 - std::abs(x - 0.8)); };
  const auto res = ternary_search(f, {0, 1, 1e-6, 200});
  CHECK(res.argmax == doctest::Approx(0.8).epsilon(1e-4));
  CHECK(f(res.argmax) < f(0.1));
}

TEST_CASE("calibrate on separated and flat sets") {
  RowMatrix w(1, 1);
  w << 1.0;
  KnowledgeState s(ProjectionParams(w, Nonlinearity::identity, 0, 1.0), 1.0);
  s.update_gram_and_aggregates(RowMatrix::Ones(2, 1), std::vector<Label>{Label::known(0), Label::known(1)});
  s.set_train_score_mean(1.0);
  const RowMatrix weights = RowMatrix::Ones(1, 2);
  auto sample = [](double v, SurrogateTag tag) {
    PseudoSample p;
    p.vector = Vector::Constant(1, v);
    p.tag = tag;
    return p;
  };
  SUBCASE("separated") {
    CalibrationSet c;
    for (double v : {1.0, 1.1, 1.3}) c.samples.push_back(sample(v, SurrogateTag::known_surrogate));
    for (double v : {0.2, 0.4}) c.samples.push_back(sample(v, SurrogateTag::open_surrogate));
    calibrate(s, c, weights);
    CHECK(s.calibrated());
    CHECK(objective(s.threshold_ratio(), score_calibration_set(c, weights), 1.0) == 1.0);
  }
  SUBCASE("flat") {
    CalibrationSet c;
    for (int i = 0; i < 3; ++i) c.samples.push_back(sample(0.7, SurrogateTag::known_surrogate));
    c.samples.push_back(sample(0.7, SurrogateTag::open_surrogate));
    const auto res = calibrate(s, c, weights);
    CHECK(s.threshold_ratio() == doctest::Approx(0.7));
    CHECK(res.value == 0.75);
  }
  SUBCASE("zero mean keeps the old ratio") {
    s.set_threshold_ratio(0.42);
    s.set_train_score_mean(0.0);
    CalibrationSet c;
    c.samples.push_back(sample(1.0, SurrogateTag::known_surrogate));
    CHECK_THROWS_AS(calibrate(s, c, weights), CalibrationError);
    CHECK(s.threshold_ratio() == 0.42);
  }
  SUBCASE("empty set") { CHECK_THROWS_AS(calibrate(s, CalibrationSet{}, weights), CalibrationError); }
}

TEST_CASE("calibrate on a synthetic three-class state matches the grid") {
  KnowledgeState s(init_projection(3, 80, 5), 1.0);
  RowMatrix x = test::gaussian(150, 3, 6);
  std::vector<Label> lab;
  for (Eigen::Index i = 0; i < 150; ++i) {
    x(i, i % 3) += 6.0;
    lab.push_back(Label::known(i % 3));
  }
  const RowMatrix h = project(x, s.projection());
  s.update_gram_and_aggregates(h, lab);
  s.update_delta(h, lab);
  const auto w = s.decode_weights();
  s.set_train_score_mean(s.mean_training_score(w));
  DapConfig cfg;
  cfg.seed = 2;
  const auto calib = build_calibration_set(s, cfg);
  const auto res = calibrate(s, calib, w);
  const auto scored = score_calibration_set(calib, w);
  const auto interval = search_interval(scored, s.train_score_mean(), 1e-3, 200);
  auto f = [&](double r) { return objective(r, scored, s.train_score_mean()); };
  CHECK(std::abs(f(s.threshold_ratio()) - grid_max(f, interval.lo, interval.hi, 100000)) <= 0.01);
  CHECK(res.iterations <= ternary_iteration_bound(interval.hi - interval.lo, 1e-3));
  CHECK(objective(s.threshold_ratio(), calib, s) == res.value);
}
