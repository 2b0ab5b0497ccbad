#include <omp.h>

#include <algorithm>

#include "owcl/kernels.hpp"

namespace owcl::kernels::parallel {

namespace {
// Rows of G updated together so each streamed row of H is reused from cache.
constexpr std::size_t kGramBlock = 8;
constexpr std::size_t kGramTile = 256;
}  // namespace

void project(ConstView x, ConstView w, bool relu, MutableView out) {
  const auto n = static_cast<std::ptrdiff_t>(x.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    double* o = out.row(r);
    const double* xr = x.row(r);
    std::fill(o, o + w.cols, 0.0);
    for (std::size_t i = 0; i < x.cols; ++i) {
      const double a = xr[i];
      const double* wi = w.row(i);
      for (std::size_t j = 0; j < w.cols; ++j) o[j] += a * wi[j];
    }
    if (relu)
      for (std::size_t j = 0; j < w.cols; ++j) o[j] = o[j] > 0.0 ? o[j] : 0.0;
  }
}

void gram_update(ConstView h, MutableView g) {
  const std::size_t m = h.cols;
  // Column tiles keep the touched panel of H in cache across row blocks.
  // Every entry still accumulates rows of H in ascending order.
  for (std::size_t j0 = 0; j0 < m; j0 += kGramTile) {
    const std::size_t j1 = std::min(j0 + kGramTile, m);
    const auto blocks = static_cast<std::ptrdiff_t>((j1 + kGramBlock - 1) / kGramBlock);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      const std::size_t i0 = static_cast<std::size_t>(b) * kGramBlock;
      const std::size_t i1 = std::min(i0 + kGramBlock, j1);
      for (std::size_t r = 0; r < h.rows; ++r) {
        const double* hr = h.row(r);
        for (std::size_t i = i0; i < i1; ++i) {
          const double a = hr[i];
          if (a == 0.0) continue;
          double* gi = g.row(i);
          for (std::size_t j = std::max(i, j0); j < j1; ++j) gi[j] += a * hr[j];
        }
      }
    }
  }
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i)
    for (std::ptrdiff_t j = 0; j < i; ++j) g.row(i)[j] = g.row(j)[i];
}

void multiply(ConstView a, ConstView b, MutableView out) {
  const auto n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    double* o = out.row(r);
    const double* ar = a.row(r);
    std::fill(o, o + b.cols, 0.0);
    for (std::size_t j = 0; j < a.cols; ++j) {
      const double s = ar[j];
      const double* bj = b.row(j);
      for (std::size_t k = 0; k < b.cols; ++k) o[k] += s * bj[k];
    }
  }
}

void squared_distances(ConstView h, ConstView centers, std::span<const std::size_t> center_of_row,
                       std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(h.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const double* c = centers.row(center_of_row[r]);
    const double* hr = h.row(r);
    double acc = 0.0;
    for (std::size_t j = 0; j < h.cols; ++j) {
      const double diff = hr[j] - c[j];
      acc += diff * diff;
    }
    out[r] = acc;
  }
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace owcl::kernels::parallel
