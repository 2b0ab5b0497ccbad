#include <cmath>

#include "doctest.h"
#include "owcl/nrp.hpp"
#include "test_util.hpp"

using namespace owcl;

TEST_CASE("same arguments give bitwise identical matrices") {
  const auto a = init_projection(12, 40, 7, 1.0);
  const auto b = init_projection(12, 40, 7, 1.0);
  CHECK(a == b);
  CHECK(a.matrix() == b.matrix());
  CHECK_FALSE(init_projection(12, 40, 8, 1.0).matrix() == a.matrix());
}

TEST_CASE("sample mean of a 100x100 matrix is near zero") {
  for (double sigma : {1.0, 0.25, 3.0}) {
    const auto p = init_projection(100, 100, 99, sigma);
    CHECK(std::abs(p.matrix().mean()) <= 4.0 / std::sqrt(100.0 * 100.0) * sigma);
    // second moment as a sanity check on the scale
    const double var = p.matrix().array().square().mean();
    CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.05));
  }
}

TEST_CASE("full-sized projection has the requested shape") {
  const auto p = init_projection(768, 10000, 7, 1.0);
  CHECK(p.input_dim() == 768);
  CHECK(p.output_dim() == 10000);
  CHECK(p.matrix().allFinite());
}

TEST_CASE("hand multiply through a 2x2 projection") {
  RowMatrix w(2, 2);
  w << 1, -1, 0, 2;
  const ProjectionParams relu(w, Nonlinearity::relu, 0, 1.0);
  const ProjectionParams ident(w, Nonlinearity::identity, 0, 1.0);
  const std::vector<double> x{1.0, 0.0};
  const Vector h = project(x, relu);
  CHECK(h(0) == 1.0);
  CHECK(h(1) == 0.0);
  const std::vector<double> ones{1.0, 1.0};
  const Vector g = project(ones, ident);
  CHECK(g(0) == 1.0);
  CHECK(g(1) == 1.0);
}

TEST_CASE("zero row maps to zero under relu") {
  const auto p = init_projection(5, 30, 1);
  const RowMatrix z = RowMatrix::Zero(3, 5);
  CHECK(project(z, p).isZero(0.0));
}

TEST_CASE("relu output is non-negative and batch equals per-row projection") {
  const auto p = init_projection(8, 50, 3);
  const RowMatrix x = test::gaussian(20, 8, 4);
  const RowMatrix h = project(x, p);
  CHECK((h.array() >= 0.0).all());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector r = project(std::span<const double>(x.row(i).data(), 8), p);
    CHECK(r.transpose() == h.row(i));
  }
}

TEST_CASE("identity projection is linear") {
  const auto p = init_projection(6, 25, 3, 1.0, Nonlinearity::identity);
  const RowMatrix x = test::gaussian(4, 6, 9);
  for (double a : {0.0, 0.5, 2.0, -3.0}) {
    const RowMatrix lhs = project(RowMatrix(a * x), p);
    const RowMatrix rhs = a * project(x, p);
    CHECK(test::rel_frobenius(lhs, rhs) <= 1e-14);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  const auto p = init_projection(4, 10, 0);
  CHECK_THROWS_AS(project(RowMatrix::Zero(2, 5), p), DimensionError);
  const std::vector<double> x(3, 1.0);
  CHECK_THROWS_AS(project(x, p), DimensionError);
}

TEST_CASE("invalid projection parameters are rejected") {
  RowMatrix w(1, 1);
  w << std::nan("");
  CHECK_THROWS(ProjectionParams(w, Nonlinearity::relu, 0, 1.0));
  CHECK_THROWS(init_projection(0, 4, 0));
  CHECK_THROWS(init_projection(4, 0, 0));
  CHECK_THROWS(init_projection(4, 4, 0, 0.0));
}

TEST_CASE("nonlinearity names round-trip") {
  CHECK(parse_nonlinearity(to_string(Nonlinearity::relu)) == Nonlinearity::relu);
  CHECK(parse_nonlinearity(to_string(Nonlinearity::identity)) == Nonlinearity::identity);
  CHECK_THROWS(parse_nonlinearity("tanh"));
}

TEST_CASE("concentration of projected inner products") {
  const std::vector<double> e1{1, 0, 0, 0}, e2{0, 1, 0, 0};
  CHECK(check_inner_product_concentration(e1, e1, 500, 400, 1) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(check_inner_product_concentration(e1, e2, 500, 400, 2)) <= 0.02);
  // sigma_w cancels in the normalisation
  CHECK(check_inner_product_concentration(e1, e1, 500, 400, 1, 2.5) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("concentration error shrinks roughly like one over sqrt(trials)") {
  const std::vector<double> f{0.3, -1.2, 0.8}, g{1.0, -0.5, 0.2};
  const double truth = 0.3 * 1.0 + 1.2 * 0.5 + 0.8 * 0.2;
  auto spread = [&](std::size_t trials) {
    double sq = 0.0;
    for (std::uint64_t s = 0; s < 30; ++s) {
      const double e = check_inner_product_concentration(f, g, 50, trials, 1000 + s) - truth;
      sq += e * e;
    }
    return std::sqrt(sq / 30.0);
  };
  const double coarse = spread(4), fine = spread(64);
  // 16x the trials should cut the error about 4x; allow slack for noise.
  CHECK(fine < coarse / 2.0);
}
