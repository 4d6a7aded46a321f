#pragma once

// Shared helpers for the test suite.

#include <catch2/catch_amalgamated.hpp>

#include "frsid/rng.hpp"
#include "frsid/types.hpp"

namespace frsid::test {

/// Seeded random matrix with i.i.d. standard-normal entries.
inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  GaussianStream stream(seed);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = stream.next();
  return m;
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  const double denom = want.norm();
  if (denom == 0.0) return got.norm();
  return (got - want).norm() / denom;
}

inline double rel_err(double got, double want) {
  if (want == 0.0) return std::abs(got);
  return std::abs(got - want) / std::abs(want);
}

}  // namespace frsid::test
