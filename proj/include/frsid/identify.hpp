#pragma once

// The randomized combined deterministic-stochastic identification pipeline.
//
// Stages, starting from the compressed Hankel matrices (N_c columns):
//
//   1. LQ of the stacked sketch [U_future; U_past; Y_past; Y_future],
//      partitioned into the 3x3 lower-triangular blocks R11..R33.
//   2. Oblique projection zeta = R32 * pinv(R22) * W_past.
//   3. LQ of zeta, then SVD of its kp x kp triangular factor; the model
//      order is read off the singular-value gaps and the state basis is
//      Theta = U1 * Sigma1^(1/2) (the triangular reduction preserves the
//      singular values and left singular vectors of zeta).
//   4. A, C from the block-row shift of Theta; B, D from the input-column
//      coefficient M = (R31 - R32 pinv(R22) R21) * inv(R11); K, eta from the
//      residual factor R33 rescaled by tau = N^-(2q+1)/2 (tau = 1 when the
//      1/sqrt(N) column scaling was applied upstream).
//
// The same estimators run unchanged on uncompressed factors, which is how
// the conventional baseline re-uses them.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frsid/errors.hpp"
#include "frsid/matops.hpp"
#include "frsid/model.hpp"
#include "frsid/sketch.hpp"
#include "frsid/types.hpp"

namespace frsid {

/// Blocked LQ factors of the stacked (possibly compressed) data matrix.
/// Row partition: km (U_future), k(m+p) (W_past), kp (Y_future).
struct LqFactors {
  Matrix l;  ///< 2k(m+p) square lower-triangular
  Matrix q;  ///< 2k(m+p) x N_c orthonormal rows; empty unless retained
  Index km = 0;   ///< rows of the U_future block
  Index kmp = 0;  ///< rows of the W_past block
  Index kp = 0;   ///< rows of the Y_future block
  double r11_condition = 0.0;  ///< 2-norm condition estimate of R11

  Index rows() const { return km + kmp + kp; }

  auto r11() const { return l.block(0, 0, km, km); }
  auto r21() const { return l.block(km, 0, kmp, km); }
  auto r22() const { return l.block(km, km, kmp, kmp); }
  auto r31() const { return l.block(km + kmp, 0, kp, km); }
  auto r32() const { return l.block(km + kmp, km, kp, kmp); }
  auto r33() const { return l.block(km + kmp, km + kmp, kp, kp); }
};

/// LQ-factors the stacked compressed matrix and records the R11 condition.
/// @p keep_q retains the orthonormal factor (only needed by reconstruction
/// tests; no estimator reads it).
inline LqFactors project_lq(const SketchedData& sketch, bool keep_q = false) {
  const Index km = sketch.u_future.rows();
  const Index kp = sketch.y_future.rows();
  const Matrix h = sketch.joint();
  if (h.cols() < h.rows())
    throw ConfigError("project_lq: sketch has fewer columns than rows");
  LqResult fac = lq(h, keep_q);
  LqFactors out;
  out.l = std::move(fac.l);
  if (keep_q) out.q = std::move(fac.q);
  out.km = km;
  out.kmp = km + kp;
  out.kp = kp;
  out.r11_condition = condition_number(singular_values(out.r11()));
  return out;
}

/// Oblique-projection result and its spectral data.
struct ProjectionResult {
  Matrix l_past;         ///< kp x k(m+p) coefficient R32 * pinv(R22)
  Matrix zeta;           ///< kp x N_c projected compressed data
  Matrix r_zeta;         ///< kp x kp lower-triangular LQ factor of zeta
  Matrix u1;             ///< kp x kp left singular vectors of r_zeta
  Vector singular_values;  ///< kp, non-increasing; equals sigma(zeta)
};

/// Computes zeta = R32 * pinv(R22) * W_past from the LQ factors.
inline ProjectionResult oblique_projection(const LqFactors& factors,
                                           const Matrix& w_past) {
  if (w_past.rows() != factors.kmp)
    throw DimensionError("oblique_projection: W_past row count mismatch");
  ProjectionResult pr;
  pr.l_past = factors.r32() * pinv(factors.r22());
  pr.zeta = pr.l_past * w_past;
  return pr;
}

/// Reduces zeta by LQ and takes the SVD of the small triangular factor.
/// sigma(r_zeta) = sigma(zeta) and the left singular vectors agree, so the
/// state basis can be read from u1 without ever decomposing zeta itself.
inline void reduce_and_svd(ProjectionResult& pr) {
  pr.r_zeta = lq(pr.zeta, /*keep_q=*/false).l;
  SvdResult svd = svd_econ(pr.r_zeta);
  pr.u1 = std::move(svd.u);
  pr.singular_values = std::move(svd.s);
}

/// Gap-based model order: the count of singular values >= rel_tol * sigma_1.
inline Index estimate_order(const Vector& singular_values,
                            double rel_tol = 1e-8) {
  return numerical_rank(singular_values, rel_tol);
}

/// Position (1-based count) of the largest log10 gap sigma_i / sigma_{i+1};
/// a diagnostic for order selection.  Returns 0 when no positive pair exists.
inline Index largest_gap_index(const Vector& singular_values) {
  Index best = 0;
  double best_gap = -1.0;
  for (Index i = 0; i + 1 < singular_values.size(); ++i) {
    if (singular_values(i + 1) <= 0.0) {
      // An exact zero after a positive value is an infinite gap.
      if (singular_values(i) > 0.0) best = i + 1;
      break;
    }
    const double gap =
        std::log10(singular_values(i) / singular_values(i + 1));
    if (gap > best_gap) {
      best_gap = gap;
      best = i + 1;
    }
  }
  return best;
}

/// State basis Theta = U1 * diag(sqrt(sigma_1..sigma_n)).
inline Matrix estimate_theta(const ProjectionResult& pr, Index order) {
  if (order < 1) throw EmptyModelError("estimate_theta: order must be >= 1");
  if (order > pr.singular_values.size())
    throw ConfigError("estimate_theta: order exceeds kp");
  return pr.u1.leftCols(order) *
         pr.singular_values.head(order).cwiseSqrt().asDiagonal();
}

namespace detail {

/// Theta without its last block row (rows 1..p(k-1)).
inline Matrix theta_lower(const Matrix& theta, Index p) {
  return theta.topRows(theta.rows() - p);
}

/// Theta without its first block row (rows p+1..pk).
inline Matrix theta_upper(const Matrix& theta, Index p) {
  return theta.bottomRows(theta.rows() - p);
}

/// pinv of the shifted basis, with a conditioning guard.
inline Matrix theta_lower_pinv(const Matrix& theta, Index p) {
  const Matrix lower = theta_lower(theta, p);
  if (lower.rows() < lower.cols())
    throw ConfigError(
        "shift-invariance: k is too small for the estimated order (need "
        "p(k-1) >= n)");
  const Vector sigma = singular_values(lower);
  if (numerical_rank(sigma) < lower.cols())
    throw IllConditionedError(
        "shift-invariance: rank-deficient shifted basis; condition " +
            std::to_string(condition_number(sigma)),
        condition_number(sigma));
  return pinv(lower);
}

}  // namespace detail

/// A and C from the block-row shift structure of the state basis.
inline std::pair<Matrix, Matrix> estimate_ac(const Matrix& theta, Index p) {
  if (theta.rows() % p != 0 || theta.rows() / p < 2)
    throw ConfigError("estimate_ac: Theta must stack k >= 2 blocks of p rows");
  const Matrix a = detail::theta_lower_pinv(theta, p) *
                   detail::theta_upper(theta, p);
  const Matrix c = theta.topRows(p);
  return {a, c};
}

/// Input-coefficient matrix Psi = (R31 - R32 pinv(R22) R21) * inv(R11).
/// Throws ExcitationError when R11 is numerically singular.
inline Matrix estimate_psi(const LqFactors& factors) {
  const Matrix r11 = factors.r11();
  const Vector sigma = singular_values(r11);
  if (numerical_rank(sigma) < r11.rows())
    throw ExcitationError(
        "estimate_psi: input block factor R11 is singular (input not "
        "persistently exciting); condition " +
        std::to_string(condition_number(sigma)));
  const Matrix numerator =
      factors.r31() - factors.r32() * pinv(factors.r22()) * factors.r21();
  // Right-solve against the lower-triangular R11 instead of inverting:
  // X * R11 = numerator  <=>  R11^T X^T = numerator^T.
  return r11.transpose()
      .triangularView<Eigen::Upper>()
      .solve(numerator.transpose())
      .transpose();
}

/// B and D from the first input-column block of Psi.
/// M = Psi(:, 1:m); D = its first block row, B = pinv(Theta_lower) * M_up.
inline std::pair<Matrix, Matrix> estimate_bd(const Matrix& psi,
                                             const Matrix& theta, Index m,
                                             Index p) {
  if (psi.cols() < m) throw DimensionError("estimate_bd: Psi has fewer than m columns");
  if (psi.rows() != theta.rows())
    throw DimensionError("estimate_bd: Psi / Theta row mismatch");
  const Matrix m_block = psi.leftCols(m);
  const Matrix d = m_block.topRows(p);
  const Matrix b =
      detail::theta_lower_pinv(theta, p) * m_block.bottomRows(psi.rows() - p);
  return {b, d};
}

/// K and eta estimation output.
struct StochasticEstimate {
  Matrix k;    ///< n x p
  Matrix eta;  ///< p x p
  bool degenerate = false;  ///< noise scale was numerically zero; K = eta = 0
};

/// Innovation scale factor tau for the residual block.
inline double innovation_tau(Index n_columns, int q, bool scaled) {
  if (scaled) return 1.0;
  return std::pow(static_cast<double>(n_columns),
                  -0.5 * static_cast<double>(2 * q + 1));
}

/// K and eta from the residual factor:
///   P = tau * R33(:, 1:p), omega = P(1:p, :),
///   K = pinv(Theta_lower) * P_up * inv(omega), eta = (omega omega^T)^(1/(2q+1)).
/// A numerically singular omega marks the estimate degenerate (K = eta = 0)
/// instead of throwing, so deterministic data still yields a full model.
inline StochasticEstimate estimate_k(const LqFactors& factors,
                                     const Matrix& theta, Index p,
                                     Index n_columns, int q,
                                     bool scaled = false) {
  const double tau = innovation_tau(n_columns, q, scaled);
  const Matrix p_hat = tau * factors.r33().leftCols(p);
  const Matrix omega = p_hat.topRows(p);

  StochasticEstimate est;
  const Vector sigma = singular_values(omega);
  // The residual scale is judged against the whole output block row of the
  // factor: near-noise-free data leaves R33 at round-off size while omega
  // itself can still look well-conditioned.
  const double output_scale =
      tau * factors.l.bottomRows(factors.kp).norm();
  if (numerical_rank(sigma) < p ||
      sigma(p - 1) <= 1e-12 * output_scale) {
    est.k = Matrix::Zero(theta.cols(), p);
    est.eta = Matrix::Zero(p, p);
    est.degenerate = true;
    return est;
  }
  const Matrix p_up = p_hat.bottomRows(p_hat.rows() - p);
  est.k = detail::theta_lower_pinv(theta, p) * p_up *
          omega.inverse();
  const Matrix omega_sq = omega * omega.transpose();
  if (q == 0) {
    est.eta = omega_sq;
  } else {
    // (omega omega^T)^(1/3) via symmetric eigendecomposition.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(omega_sq);
    const Vector roots =
        eig.eigenvalues().cwiseMax(0.0).array().pow(1.0 / 3.0).matrix();
    est.eta =
        eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
  }
  return est;
}

/// Full-pipeline configuration.
struct IdentifyConfig {
  SketchConfig sketch;
  double order_rel_tol = 1e-8;   ///< singular-value cutoff for the order
  Index order_override = 0;      ///< > 0 pins the model order
  bool keep_q = false;           ///< retain the LQ orthonormal factor

  void validate(Index kp) const {
    if (order_override < 0 || order_override > kp)
      throw ConfigError("identify: order override must lie in [0, kp]");
  }
};

/// Diagnostics accumulated across the pipeline stages.
struct IdentifyDiagnostics {
  ProjectionResult projection;
  LqFactors factors;
  Index order = 0;
  Index gap_index = 0;
  double act_ms = 0.0;  ///< sketch + factorization + estimation wall time
  double sketch_ms = 0.0;
  double lq_ms = 0.0;
  bool noise_degenerate = false;
  std::vector<std::string> warnings;
};

/// A model plus how it was obtained.
struct IdentifyResult {
  StateSpaceModel model;
  IdentifyDiagnostics diagnostics;
};

namespace detail {

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(std::string("stage ") + stage + ": " + e.what());
  }
}

}  // namespace detail

/// Runs the full randomized pipeline on a time series.
///
/// The wall-clock diagnostics cover compression, factorization, and
/// estimation only (no file IO happens inside).  @p io, when non-null,
/// receives the slow-memory word counts of the compression pass.
inline IdentifyResult run_fr2sid(const TimeSeriesData& ts,
                                 const IdentifyConfig& config,
                                 IoCounters* io = nullptr) {
  ts.validate();
  const Index kp = config.sketch.k * ts.p();
  config.validate(kp);

  IdentifyResult result;
  IdentifyDiagnostics& diag = result.diagnostics;
  const detail::StageTimer total_timer;

  const detail::StageTimer sketch_timer;
  const SketchedData sketch = detail::run_stage(
      "sketch", [&] { return sketch_stream(ts, config.sketch, io); });
  diag.sketch_ms = sketch_timer.elapsed_ms();

  const detail::StageTimer lq_timer;
  diag.factors = detail::run_stage(
      "lq", [&] { return project_lq(sketch, config.keep_q); });
  diag.lq_ms = lq_timer.elapsed_ms();

  diag.projection = detail::run_stage("projection", [&] {
    ProjectionResult pr = oblique_projection(diag.factors, sketch.w_past());
    reduce_and_svd(pr);
    return pr;
  });

  diag.gap_index = largest_gap_index(diag.projection.singular_values);
  diag.order = config.order_override > 0
                   ? config.order_override
                   : estimate_order(diag.projection.singular_values,
                                    config.order_rel_tol);
  if (diag.order < 1)
    throw EmptyModelError("identify: estimated model order is zero");
  if (diag.order > config.sketch.k * std::min(ts.m(), ts.p()) &&
      config.order_override == 0)
    diag.warnings.push_back("estimated order " + std::to_string(diag.order) +
                            " is large relative to the horizon; consider "
                            "increasing k");

  const Matrix theta = detail::run_stage(
      "theta", [&] { return estimate_theta(diag.projection, diag.order); });

  StateSpaceModel& model = result.model;
  detail::run_stage("ac", [&] {
    auto [a, c] = estimate_ac(theta, ts.p());
    model.a = std::move(a);
    model.c = std::move(c);
    return 0;
  });
  detail::run_stage("bd", [&] {
    const Matrix psi = estimate_psi(diag.factors);
    auto [b, d] = estimate_bd(psi, theta, ts.m(), ts.p());
    model.b = std::move(b);
    model.d = std::move(d);
    return 0;
  });
  detail::run_stage("k", [&] {
    StochasticEstimate est =
        estimate_k(diag.factors, theta, ts.p(), sketch.n_columns,
                   sketch.q, sketch.scaled);
    diag.noise_degenerate = est.degenerate;
    if (est.degenerate)
      diag.warnings.push_back(
          "noise scale is numerically zero; K and eta set to 0");
    model.k = std::move(est.k);
    model.eta = std::move(est.eta);
    return 0;
  });

  diag.act_ms = total_timer.elapsed_ms();
  model.validate();
  if (!diag.noise_degenerate && model.predictor_spectral_radius() >= 1.0)
    diag.warnings.push_back("predictor A - K C has spectral radius >= 1");
  return result;
}

}  // namespace frsid
