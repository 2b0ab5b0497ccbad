#include "owcl/kernels.hpp"

namespace owcl::kernels::serial {

void project(ConstView x, ConstView w, bool relu, MutableView out) {
  for (std::size_t r = 0; r < x.rows; ++r) {
    double* o = out.row(r);
    for (std::size_t j = 0; j < w.cols; ++j) o[j] = 0.0;
    for (std::size_t i = 0; i < x.cols; ++i) {
      const double a = x.row(r)[i];
      const double* wi = w.row(i);
      for (std::size_t j = 0; j < w.cols; ++j) o[j] += a * wi[j];
    }
    if (relu)
      for (std::size_t j = 0; j < w.cols; ++j) o[j] = o[j] > 0.0 ? o[j] : 0.0;
  }
}

void gram_update(ConstView h, MutableView g) {
  const std::size_t m = h.cols;
  for (std::size_t r = 0; r < h.rows; ++r) {
    const double* hr = h.row(r);
    for (std::size_t i = 0; i < m; ++i) {
      const double a = hr[i];
      if (a == 0.0) continue;
      double* gi = g.row(i);
      for (std::size_t j = i; j < m; ++j) gi[j] += a * hr[j];
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < i; ++j) g.row(i)[j] = g.row(j)[i];
}

void multiply(ConstView a, ConstView b, MutableView out) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    double* o = out.row(r);
    for (std::size_t k = 0; k < b.cols; ++k) o[k] = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) {
      const double s = a.row(r)[j];
      const double* bj = b.row(j);
      for (std::size_t k = 0; k < b.cols; ++k) o[k] += s * bj[k];
    }
  }
}

void squared_distances(ConstView h, ConstView centers, std::span<const std::size_t> center_of_row,
                       std::span<double> out) {
  for (std::size_t r = 0; r < h.rows; ++r) {
    const double* c = centers.row(center_of_row[r]);
    double acc = 0.0;
    for (std::size_t j = 0; j < h.cols; ++j) {
      const double diff = h.row(r)[j] - c[j];
      acc += diff * diff;
    }
    out[r] = acc;
  }
}

}  // namespace owcl::kernels::serial
