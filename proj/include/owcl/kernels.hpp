#pragma once

#include <cstddef>
#include <span>

#include "owcl/types.hpp"

// Dense inner loops of the pipeline. Each kernel exists twice: a plain
// serial reference and an OpenMP version. Both accumulate every output entry
// over the same index order, so they agree bitwise and results do not depend
// on the thread count.

namespace owcl::kernels {

/// Row-major read-only view.
struct ConstView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  const double* row(std::size_t i) const { return data + i * cols; }
};

struct MutableView {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double* row(std::size_t i) const { return data + i * cols; }
};

inline ConstView view(const RowMatrix& m) {
  return {m.data(), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
}
inline MutableView mutable_view(RowMatrix& m) {
  return {m.data(), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
}

namespace serial {

/// out = g(x * w) with g = relu when `relu`, identity otherwise.
void project(ConstView x, ConstView w, bool relu, MutableView out);
/// g += h^T h, keeping g exactly symmetric.
void gram_update(ConstView h, MutableView g);
/// out = a * b.
void multiply(ConstView a, ConstView b, MutableView out);
/// out[r] = |h[r] - centers[center_of_row[r]]|^2.
void squared_distances(ConstView h, ConstView centers, std::span<const std::size_t> center_of_row,
                       std::span<double> out);

}  // namespace serial

namespace parallel {

void project(ConstView x, ConstView w, bool relu, MutableView out);
void gram_update(ConstView h, MutableView g);
void multiply(ConstView a, ConstView b, MutableView out);
void squared_distances(ConstView h, ConstView centers, std::span<const std::size_t> center_of_row,
                       std::span<double> out);

/// Threads OpenMP will use for the kernels above.
int max_threads();

}  // namespace parallel

}  // namespace owcl::kernels
