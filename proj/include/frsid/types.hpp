#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace frsid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

/// True when every entry of @p m is finite (no NaN/Inf).
inline bool is_finite(const Eigen::Ref<const Matrix>& m) {
  return m.allFinite();
}

}  // namespace frsid
