#pragma once

// Conventional (uncompressed) subspace identification.
//
// Works on the full N-column Hankel matrices via a sequential column-block
// LQ, then re-uses the identify-module estimators on the uncompressed
// factors, so a comparison against the randomized pipeline isolates
// compression as the only difference.  A memory guard emulates the classic
// in-core formulation: the predicted conventional working set is
// k(3m + 4p) * N words (H plus the projected data and its past copy), and
// the run refuses when that exceeds the configured cap even though this
// implementation streams in O(block) memory.

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "frsid/errors.hpp"
#include "frsid/hankel.hpp"
#include "frsid/identify.hpp"
#include "frsid/matops.hpp"
#include "frsid/model.hpp"
#include "frsid/timeseries.hpp"
#include "frsid/types.hpp"

namespace frsid {

/// How the baseline estimates B and D.
enum class BdMethod {
  kStructural,      ///< identify-module Psi path on the uncompressed factors
  kFullRegression,  ///< least squares over all N_t samples (O(n^2) state cost)
};

struct BaselineConfig {
  Index k = 0;
  Index d = 1;  ///< streaming column blocks for the sequential LQ
  double order_rel_tol = 1e-8;
  Index order_override = 0;
  BdMethod bd_method = BdMethod::kStructural;
  std::uint64_t memory_cap_bytes = 4ULL << 30;  ///< default 4 GiB
  bool scale_columns = false;

  void validate() const {
    if (k < 1) throw ConfigError("baseline: k must be positive");
    if (d < 1) throw ConfigError("baseline: d must be positive");
    if (order_override < 0)
      throw ConfigError("baseline: order override must be >= 0");
  }
};

/// Predicted in-core footprint of the conventional method, in bytes.
inline std::uint64_t conventional_footprint_bytes(Index k, Index m, Index p,
                                                  Index n_columns) {
  return 8ULL * static_cast<std::uint64_t>(k) *
         static_cast<std::uint64_t>(3 * m + 4 * p) *
         static_cast<std::uint64_t>(n_columns);
}

/// B/D regression over the full record with A and C fixed:
///   y(t) = C A^t x0 + sum_{s<t} C A^{t-1-s} B u(s) + D u(t) + e(t),
/// which is linear in (B, D, x0).  Returns the estimates plus the number of
/// floating-point operations spent (the count grows linearly in N_t).
struct BdRegressionResult {
  Matrix b;
  Matrix d;
  Vector x0;
  std::uint64_t flops = 0;
};

inline BdRegressionResult estimate_bd_regression(const Matrix& a,
                                                 const Matrix& c,
                                                 const TimeSeriesData& ts) {
  ts.validate();
  const Index n = a.rows();
  const Index m = ts.m();
  const Index p = ts.p();
  if (a.cols() != n || c.cols() != n || c.rows() != p)
    throw DimensionError("bd regression: A/C shapes inconsistent with data");
  const Index n_samples = ts.n_samples();
  const Index n_params = n * m + p * m + n;

  // Convolution states: S_j(t) = sum_{s<t} u_j(s) A^{t-1-s}  (n x n per
  // input channel), plus the initial-state propagator T(t) = A^t.
  std::vector<Matrix> s(static_cast<std::size_t>(m), Matrix::Zero(n, n));
  Matrix t_pow = Matrix::Identity(n, n);

  Matrix gram = Matrix::Zero(n_params, n_params);
  Vector rhs = Vector::Zero(n_params);
  Matrix regressor(p, n_params);
  std::uint64_t flops = 0;

  for (Index t = 0; t < n_samples; ++t) {
    for (Index j = 0; j < m; ++j) {
      regressor.middleCols(j * n, n).noalias() =
          c * s[static_cast<std::size_t>(j)];
      regressor.middleCols(n * m + j * p, p) =
          ts.u(j, t) * Matrix::Identity(p, p);
    }
    regressor.rightCols(n).noalias() = c * t_pow;
    gram.selfadjointView<Eigen::Lower>().rankUpdate(regressor.transpose());
    rhs.noalias() += regressor.transpose() * ts.y.col(t);

    for (Index j = 0; j < m; ++j) {
      Matrix& s_j = s[static_cast<std::size_t>(j)];
      s_j = a * s_j;
      s_j.diagonal().array() += ts.u(j, t);
    }
    t_pow = a * t_pow;
    // Per-sample operation count: state updates (m+1 products of n x n
    // matrices), regressor blocks, and the normal-equation update.
    flops += static_cast<std::uint64_t>(2 * n * n * n) *
                 static_cast<std::uint64_t>(m + 1) +
             static_cast<std::uint64_t>(2 * p * n * n) *
                 static_cast<std::uint64_t>(m + 1) +
             static_cast<std::uint64_t>(p) *
                 static_cast<std::uint64_t>(n_params) *
                 static_cast<std::uint64_t>(n_params + 2);
  }
  gram.triangularView<Eigen::Upper>() = gram.transpose();

  const Vector solution = pinv(gram) * rhs;
  BdRegressionResult result;
  result.b.resize(n, m);
  for (Index j = 0; j < m; ++j) result.b.col(j) = solution.segment(j * n, n);
  result.d.resize(p, m);
  for (Index j = 0; j < m; ++j)
    result.d.col(j) = solution.segment(n * m + j * p, p);
  result.x0 = solution.tail(n);
  result.flops = flops;
  return result;
}

/// Runs the conventional pipeline on the full (uncompressed) Hankel data.
inline IdentifyResult run_conventional(const TimeSeriesData& ts,
                                       const BaselineConfig& config,
                                       IoCounters* io = nullptr) {
  config.validate();
  ts.validate();
  const Index k = config.k;
  const Index m = ts.m();
  const Index p = ts.p();
  const Index n_columns = hankel_columns(ts.n_samples(), k);
  const Index rows = 2 * k * (m + p);
  if (n_columns < rows)
    throw InsufficientDataError(
        "baseline: need N >= 2k(m+p) columns, got N = " +
        std::to_string(n_columns));

  const std::uint64_t predicted =
      conventional_footprint_bytes(k, m, p, n_columns);
  if (predicted > config.memory_cap_bytes)
    throw MemoryCapError(
        "baseline: conventional working set " + std::to_string(predicted) +
            " bytes exceeds memory cap " +
            std::to_string(config.memory_cap_bytes) +
            " bytes; use the randomized pipeline for this problem size",
        predicted, config.memory_cap_bytes);

  const BlockPartition part(n_columns, std::min<Index>(config.d, n_columns));
  IdentifyResult result;
  IdentifyDiagnostics& diag = result.diagnostics;
  const detail::StageTimer total_timer;

  // Pass 1: sequential LQ of the stacked data matrix.
  const detail::StageTimer lq_timer;
  BlockedLqAccumulator h_acc(rows);
  for (Index i = 0; i < part.d; ++i) {
    const HankelSet block =
        hankel_block(ts, k, part, i, config.scale_columns, io);
    h_acc.absorb(block.joint());
  }
  diag.factors.l = h_acc.l();
  diag.factors.km = k * m;
  diag.factors.kmp = k * (m + p);
  diag.factors.kp = k * p;
  diag.factors.r11_condition =
      condition_number(singular_values(diag.factors.r11()));
  diag.lq_ms = lq_timer.elapsed_ms();

  // Pass 2: project the past data block-by-block and reduce.
  diag.projection.l_past =
      diag.factors.r32() * pinv(diag.factors.r22());
  BlockedLqAccumulator zeta_acc(k * p);
  for (Index i = 0; i < part.d; ++i) {
    const HankelSet block =
        hankel_block(ts, k, part, i, config.scale_columns, io);
    Matrix w_block(k * (m + p), block.width());
    w_block.topRows(k * m) = block.u_past;
    w_block.bottomRows(k * p) = block.y_past;
    zeta_acc.absorb(diag.projection.l_past * w_block);
  }
  diag.projection.r_zeta = zeta_acc.l();
  SvdResult svd = svd_econ(diag.projection.r_zeta);
  diag.projection.u1 = std::move(svd.u);
  diag.projection.singular_values = std::move(svd.s);

  diag.gap_index = largest_gap_index(diag.projection.singular_values);
  diag.order = config.order_override > 0
                   ? config.order_override
                   : estimate_order(diag.projection.singular_values,
                                    config.order_rel_tol);
  if (diag.order < 1)
    throw EmptyModelError("baseline: estimated model order is zero");

  const Matrix theta = estimate_theta(diag.projection, diag.order);
  StateSpaceModel& model = result.model;
  {
    auto [a, c] = estimate_ac(theta, p);
    model.a = std::move(a);
    model.c = std::move(c);
  }
  if (config.bd_method == BdMethod::kStructural) {
    const Matrix psi = estimate_psi(diag.factors);
    auto [b, d] = estimate_bd(psi, theta, m, p);
    model.b = std::move(b);
    model.d = std::move(d);
  } else {
    BdRegressionResult reg = estimate_bd_regression(model.a, model.c, ts);
    model.b = std::move(reg.b);
    model.d = std::move(reg.d);
  }
  {
    StochasticEstimate est = estimate_k(diag.factors, theta, p, n_columns,
                                        /*q=*/0, config.scale_columns);
    diag.noise_degenerate = est.degenerate;
    if (est.degenerate)
      diag.warnings.push_back(
          "noise scale is numerically zero; K and eta set to 0");
    model.k = std::move(est.k);
    model.eta = std::move(est.eta);
  }

  diag.act_ms = total_timer.elapsed_ms();
  model.validate();
  if (!diag.noise_degenerate && model.predictor_spectral_radius() >= 1.0)
    diag.warnings.push_back("predictor A - K C has spectral radius >= 1");
  return result;
}

}  // namespace frsid
