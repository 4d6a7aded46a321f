#pragma once

// Dense factorization kernels shared by the identification pipelines.
//
// All routines operate on column-major double matrices and are deterministic:
// a fixed input yields a bit-identical result on every call.  Conventions
// that downstream code relies on:
//
//   * LQ factors have a non-negative diagonal (row signs are normalized, the
//     compensating sign is folded into Q), and entries above the diagonal of
//     L are exact zeros.
//   * Singular values are returned in non-increasing order.
//   * Pseudo-inverses truncate singular values below rel_tol * sigma_max.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "frsid/errors.hpp"
#include "frsid/types.hpp"

namespace frsid {

/// Economy LQ factorization M = L * Q with orthonormal rows of Q.
struct LqResult {
  Matrix l;      ///< rows(M) x min(rows, cols), lower-triangular/trapezoidal
  Matrix q;      ///< min(rows, cols) x cols(M); empty unless requested
  bool has_q = false;
};

/// Computes the economy LQ of @p m (via Householder QR of the transpose).
///
/// The diagonal of L is normalized to be >= 0; when @p keep_q is true the
/// compensating sign flips are applied to the corresponding rows of Q so that
/// L * Q always reproduces M.  Throws InputError on non-finite input.
inline LqResult lq(const Eigen::Ref<const Matrix>& m, bool keep_q = true) {
  if (m.size() == 0) throw DimensionError("lq: empty matrix");
  if (!is_finite(m)) throw InputError("lq: non-finite input");
  const Index rows = m.rows();
  const Index cols = m.cols();
  const Index mn = std::min(rows, cols);

  Eigen::HouseholderQR<Matrix> qr(m.transpose());
  Matrix r = qr.matrixQR().topRows(mn).triangularView<Eigen::Upper>();

  LqResult result;
  result.l = r.transpose();  // exact zeros above the diagonal
  if (keep_q) {
    result.q = Matrix::Identity(cols, mn);
    result.q.applyOnTheLeft(qr.householderQ());
    result.q.transposeInPlace();
    result.has_q = true;
  }
  for (Index i = 0; i < mn; ++i) {
    if (result.l(i, i) < 0.0) {
      result.l.col(i) = -result.l.col(i);
      if (keep_q) result.q.row(i) = -result.q.row(i);
    }
  }
  return result;
}

/// Thin singular value decomposition M = U * diag(S) * V^T.
struct SvdResult {
  Matrix u;  ///< rows x min(rows, cols)
  Vector s;  ///< min(rows, cols), non-increasing
  Matrix v;  ///< cols x min(rows, cols)
};

/// Computes the economy SVD of @p m.  Throws InputError on non-finite input.
inline SvdResult svd_econ(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) throw DimensionError("svd_econ: empty matrix");
  if (!is_finite(m)) throw InputError("svd_econ: non-finite input");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return SvdResult{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Singular values of @p m only (no vectors).
inline Vector singular_values(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) throw DimensionError("singular_values: empty matrix");
  if (!is_finite(m)) throw InputError("singular_values: non-finite input");
  return Eigen::BDCSVD<Matrix>(m).singularValues();
}

/// Number of singular values >= rel_tol * s(0); 0 for an all-zero spectrum.
inline Index numerical_rank(const Vector& s, double rel_tol = 1e-12) {
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cutoff = rel_tol * s(0);
  Index rank = 0;
  while (rank < s.size() && s(rank) >= cutoff) ++rank;
  return rank;
}

/// Numerical rank of a matrix at relative tolerance @p rel_tol.
inline Index numerical_rank(const Eigen::Ref<const Matrix>& m,
                            double rel_tol = 1e-12) {
  return numerical_rank(singular_values(m), rel_tol);
}

/// 2-norm condition number estimate from a singular value spectrum.
inline double condition_number(const Vector& s) {
  if (s.size() == 0 || s(s.size() - 1) <= 0.0)
    return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

/// Moore-Penrose pseudo-inverse with singular values below
/// rel_tol * sigma_max treated as zero.  pinv(0) = 0.
inline Matrix pinv(const Eigen::Ref<const Matrix>& m, double rel_tol = 1e-12) {
  const SvdResult svd = svd_econ(m);
  const Index rank = numerical_rank(svd.s, rel_tol);
  if (rank == 0) return Matrix::Zero(m.cols(), m.rows());
  return svd.v.leftCols(rank) *
         svd.s.head(rank).cwiseInverse().asDiagonal() *
         svd.u.leftCols(rank).transpose();
}

/// Cholesky factor G (lower-triangular, G * G^T = M) of a symmetric
/// positive-definite matrix.  The input is symmetrized as (M + M^T) / 2
/// before factorization.  Throws DefinitenessError carrying the failing
/// pivot (1-based) when the matrix is not positive definite.
inline Matrix cholesky_lower(const Eigen::Ref<const Matrix>& m) {
  if (m.rows() != m.cols())
    throw DimensionError("cholesky_lower: matrix must be square");
  if (!is_finite(m)) throw InputError("cholesky_lower: non-finite input");
  const Index n = m.rows();
  const Matrix sym = 0.5 * (m + m.transpose());
  Matrix g = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double diag = sym(j, j) - g.row(j).head(j).squaredNorm();
    if (diag <= 0.0 || !std::isfinite(diag))
      throw DefinitenessError(
          "cholesky_lower: matrix not positive definite at pivot " +
              std::to_string(j + 1),
          j + 1);
    g(j, j) = std::sqrt(diag);
    for (Index i = j + 1; i < n; ++i) {
      g(i, j) =
          (sym(i, j) - g.row(i).head(j).dot(g.row(j).head(j))) / g(j, j);
    }
  }
  return g;
}

/// Sequential LQ over column blocks of a wide matrix.
///
/// Maintains the lower-triangular factor L_i of the LQ of [M_1 ... M_i]
/// by stacking the previous factor against each incoming block and
/// re-factorizing: L_i = lq([L_{i-1}, M_i]).l.  After all blocks have been
/// absorbed, l() equals (up to the sign convention) the L factor of the LQ
/// of the full matrix, but only O(rows^2 + rows * block_width) memory is
/// ever live.  Q is never formed.
class BlockedLqAccumulator {
 public:
  explicit BlockedLqAccumulator(Index rows) : rows_(rows) {
    if (rows <= 0) throw DimensionError("BlockedLqAccumulator: rows must be positive");
  }

  void absorb(const Eigen::Ref<const Matrix>& block) {
    if (block.rows() != rows_)
      throw DimensionError("BlockedLqAccumulator: block row count mismatch");
    if (block.cols() == 0) return;
    if (l_.size() == 0) {
      l_ = lq(block, false).l;
    } else {
      Matrix stacked(rows_, l_.cols() + block.cols());
      stacked.leftCols(l_.cols()) = l_;
      stacked.rightCols(block.cols()) = block;
      l_ = lq(stacked, false).l;
    }
    cols_seen_ += block.cols();
  }

  /// Total number of columns absorbed so far.
  Index cols_seen() const { return cols_seen_; }

  /// Current lower-triangular factor (rows x min(rows, cols_seen)).
  const Matrix& l() const {
    if (l_.size() == 0)
      throw DimensionError("BlockedLqAccumulator: no columns absorbed");
    return l_;
  }

 private:
  Index rows_ = 0;
  Index cols_seen_ = 0;
  Matrix l_;
};

}  // namespace frsid
