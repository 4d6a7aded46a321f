#pragma once

// Block-Hankel views of a time series.
//
// For horizon k and N_t samples there are N = N_t - 2k + 1 usable columns.
// Column j of the stacked data matrix reads 2k consecutive samples starting
// at time j:
//
//   U_past(:, j)   = [u(j); ...; u(j+k-1)]          (k*m rows)
//   U_future(:, j) = [u(j+k); ...; u(j+2k-1)]       (k*m rows)
//
// and likewise for Y.  The joint matrix used by the factorizations stacks
// [U_future; U_past; Y_past; Y_future] (2k(m+p) rows).  Columns are only
// ever materialized block-by-block so the full matrix never has to fit in
// memory.

#include <cmath>
#include <cstdint>
#include <string>

#include "frsid/errors.hpp"
#include "frsid/io_counters.hpp"
#include "frsid/timeseries.hpp"
#include "frsid/types.hpp"

namespace frsid {

/// Partition of the N Hankel columns into d contiguous blocks.
/// Blocks 0..d-2 have floor(N/d) columns; the final block absorbs the
/// remainder.
struct BlockPartition {
  Index n_columns = 0;  ///< N
  Index d = 1;          ///< number of blocks

  BlockPartition() = default;
  BlockPartition(Index n_columns, Index d) : n_columns(n_columns), d(d) {
    if (n_columns < 1) throw ConfigError("block partition: N must be positive");
    if (d < 1 || d > n_columns)
      throw ConfigError("block partition: d must satisfy 1 <= d <= N");
  }

  Index base_width() const { return n_columns / d; }

  Index start(Index i) const {
    check(i);
    return i * base_width();
  }

  Index width(Index i) const {
    check(i);
    return i + 1 == d ? n_columns - (d - 1) * base_width() : base_width();
  }

 private:
  void check(Index i) const {
    if (i < 0 || i >= d)
      throw ConfigError("block partition: block index " + std::to_string(i) +
                        " out of range [0, " + std::to_string(d) + ")");
  }
};

/// Number of Hankel columns for horizon @p k on @p n_samples samples.
inline Index hankel_columns(Index n_samples, Index k) {
  if (k < 1) throw ConfigError("hankel: k must be positive");
  const Index n = n_samples - 2 * k + 1;
  if (n < 1)
    throw InsufficientDataError(
        "hankel: need N_t >= 2k, got N_t = " + std::to_string(n_samples) +
        ", k = " + std::to_string(k));
  return n;
}

/// The four Hankel blocks for one column range, stacked per matrix.
struct HankelSet {
  Matrix u_past;    ///< k*m x width
  Matrix u_future;  ///< k*m x width
  Matrix y_past;    ///< k*p x width
  Matrix y_future;  ///< k*p x width

  Index width() const { return u_past.cols(); }

  /// Stacked joint block [U_future; U_past; Y_past; Y_future].
  Matrix joint() const {
    Matrix h(2 * (u_past.rows() + y_past.rows()), width());
    Index row = 0;
    h.middleRows(row, u_future.rows()) = u_future;
    row += u_future.rows();
    h.middleRows(row, u_past.rows()) = u_past;
    row += u_past.rows();
    h.middleRows(row, y_past.rows()) = y_past;
    row += y_past.rows();
    h.middleRows(row, y_future.rows()) = y_future;
    return h;
  }
};

namespace detail {

/// Fills a k-block Hankel slice of @p channel data: column j of the result
/// stacks samples channel(:, offset + start + j) ... (offset + start + j + k - 1).
inline Matrix hankel_slice(const Matrix& channels, Index k, Index offset,
                           Index start, Index width) {
  const Index rows = channels.rows();
  Matrix block(k * rows, width);
  for (Index j = 0; j < width; ++j)
    for (Index r = 0; r < k; ++r)
      block.col(j).segment(r * rows, rows) =
          channels.col(offset + start + j + r);
  return block;
}

}  // namespace detail

/// Materializes Hankel block @p i of the partition @p part (0-based).
///
/// When @p scale_columns is true every entry is multiplied by 1/sqrt(N)
/// (the optional normalized-factor convention; downstream scale factors
/// account for it).  @p io, when non-null, is charged one block message and
/// 2k(m+p) * width words read.
inline HankelSet hankel_block(const TimeSeriesData& ts, Index k,
                              const BlockPartition& part, Index i,
                              bool scale_columns = false,
                              IoCounters* io = nullptr) {
  ts.validate();
  const Index n = hankel_columns(ts.n_samples(), k);
  if (n != part.n_columns)
    throw ConfigError("hankel_block: partition does not match N = " +
                      std::to_string(n));
  const Index start = part.start(i);
  const Index width = part.width(i);

  HankelSet set;
  set.u_past = detail::hankel_slice(ts.u, k, 0, start, width);
  set.u_future = detail::hankel_slice(ts.u, k, k, start, width);
  set.y_past = detail::hankel_slice(ts.y, k, 0, start, width);
  set.y_future = detail::hankel_slice(ts.y, k, k, start, width);
  if (scale_columns) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    set.u_past *= scale;
    set.u_future *= scale;
    set.y_past *= scale;
    set.y_future *= scale;
  }
  count_block(io);
  count_read(io, static_cast<std::uint64_t>(2 * k * (ts.m() + ts.p())) *
                     static_cast<std::uint64_t>(width));
  return set;
}

/// Materializes the full Hankel set in one piece (d = 1).  Intended for
/// tests and small problems; large problems should stream hankel_block.
inline HankelSet build_hankel(const TimeSeriesData& ts, Index k,
                              bool scale_columns = false,
                              IoCounters* io = nullptr) {
  const Index n = hankel_columns(ts.n_samples(), k);
  return hankel_block(ts, k, BlockPartition(n, 1), 0, scale_columns, io);
}

}  // namespace frsid
