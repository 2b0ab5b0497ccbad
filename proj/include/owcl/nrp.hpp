#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "owcl/types.hpp"

namespace owcl {

enum class Nonlinearity { relu, identity };

std::string to_string(Nonlinearity g);
Nonlinearity parse_nonlinearity(const std::string& name);

/// Frozen random projection W (d x M) and the nonlinearity applied after it.
/// Immutable once created; every task is projected through the same W.
class ProjectionParams {
public:
  /// Rebuilds params from stored parts (state loading). Entries must be finite.
  ProjectionParams(RowMatrix matrix, Nonlinearity nonlinearity, std::uint64_t seed, double sigma_w);

  std::size_t input_dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(matrix_.cols()); }
  const RowMatrix& matrix() const { return matrix_; }
  Nonlinearity nonlinearity() const { return nonlinearity_; }
  std::uint64_t seed() const { return seed_; }
  double sigma_w() const { return sigma_w_; }

  friend bool operator==(const ProjectionParams&, const ProjectionParams&) = default;

private:
  RowMatrix matrix_;
  Nonlinearity nonlinearity_;
  std::uint64_t seed_;
  double sigma_w_;
};

/// Draws W with i.i.d. N(0, sigma_w^2) entries in row-major order from Rng(seed).
ProjectionParams init_projection(std::size_t input_dim, std::size_t output_dim, std::uint64_t seed,
                                 double sigma_w = 1.0, Nonlinearity g = Nonlinearity::relu);

/// g(batch * W), one projected sample per row. Throws DimensionError.
RowMatrix project(const RowMatrix& batch, const ProjectionParams& params);
Vector project(std::span<const double> x, const ProjectionParams& params);

/// Monte-Carlo mean over `trials` fresh linear projections of
/// (W^T f)^T (W^T f') / (M sigma_w^2). Converges to f^T f'.
double check_inner_product_concentration(std::span<const double> f, std::span<const double> f_prime,
                                         std::size_t output_dim, std::size_t trials,
                                         std::uint64_t seed, double sigma_w = 1.0);

}  // namespace owcl
