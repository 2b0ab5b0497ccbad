#include "owcl/nrp.hpp"

#include <cmath>

#include "owcl/kernels.hpp"
#include "owcl/rng.hpp"

namespace owcl {

std::string to_string(Nonlinearity g) { return g == Nonlinearity::relu ? "relu" : "identity"; }

Nonlinearity parse_nonlinearity(const std::string& name) {
  if (name == "relu") return Nonlinearity::relu;
  if (name == "identity") return Nonlinearity::identity;
  throw ConfigError("unknown nonlinearity '" + name + "' (expected relu or identity)");
}

ProjectionParams::ProjectionParams(RowMatrix matrix, Nonlinearity nonlinearity, std::uint64_t seed,
                                   double sigma_w)
    : matrix_(std::move(matrix)), nonlinearity_(nonlinearity), seed_(seed), sigma_w_(sigma_w) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) throw DimensionError("projection must be at least 1x1");
  if (!(sigma_w_ > 0.0)) throw std::invalid_argument("sigma_w must be positive");
  if (!matrix_.allFinite()) throw std::invalid_argument("projection matrix has non-finite entries");
}

ProjectionParams init_projection(std::size_t input_dim, std::size_t output_dim, std::uint64_t seed,
                                 double sigma_w, Nonlinearity g) {
  if (input_dim < 1 || output_dim < 1) throw DimensionError("projection dimensions must be >= 1");
  if (!(sigma_w > 0.0)) throw std::invalid_argument("sigma_w must be positive");
  RowMatrix w(static_cast<Eigen::Index>(input_dim), static_cast<Eigen::Index>(output_dim));
  Rng rng(seed);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = sigma_w * rng.normal();
  return ProjectionParams(std::move(w), g, seed, sigma_w);
}

RowMatrix project(const RowMatrix& batch, const ProjectionParams& params) {
  if (static_cast<std::size_t>(batch.cols()) != params.input_dim())
    throw DimensionError("batch has " + std::to_string(batch.cols()) + " columns, projection expects " +
                         std::to_string(params.input_dim()));
  RowMatrix out(batch.rows(), static_cast<Eigen::Index>(params.output_dim()));
  kernels::parallel::project(kernels::view(batch), kernels::view(params.matrix()),
                             params.nonlinearity() == Nonlinearity::relu, kernels::mutable_view(out));
  return out;
}

Vector project(std::span<const double> x, const ProjectionParams& params) {
  RowMatrix row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) row(0, static_cast<Eigen::Index>(j)) = x[j];
  return project(row, params).row(0).transpose();
}

double check_inner_product_concentration(std::span<const double> f, std::span<const double> f_prime,
                                         std::size_t output_dim, std::size_t trials,
                                         std::uint64_t seed, double sigma_w) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (f.size() != f_prime.size() || f.empty()) throw DimensionError("vectors must share a positive length");
  RowMatrix pair(2, static_cast<Eigen::Index>(f.size()));
  for (std::size_t j = 0; j < f.size(); ++j) {
    pair(0, static_cast<Eigen::Index>(j)) = f[j];
    pair(1, static_cast<Eigen::Index>(j)) = f_prime[j];
  }
  const double norm = static_cast<double>(output_dim) * sigma_w * sigma_w;
  double sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto params =
        init_projection(f.size(), output_dim, derive_seed(seed, t), sigma_w, Nonlinearity::identity);
    const RowMatrix projected = project(pair, params);
    sum += projected.row(0).dot(projected.row(1)) / norm;
  }
  return sum / static_cast<double>(trials);
}

}  // namespace owcl
