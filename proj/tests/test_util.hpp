#pragma once

#include <filesystem>
#include <string>

#include "owcl/rng.hpp"
#include "owcl/types.hpp"

namespace owcl::test {

inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(OWCL_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline RowMatrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

inline double rel_frobenius(const RowMatrix& a, const RowMatrix& b) {
  const double denom = b.norm();
  return denom == 0.0 ? a.norm() : (a - b).norm() / denom;
}

}  // namespace owcl::test
