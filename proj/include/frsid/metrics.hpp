#pragma once

// Accuracy and cost metrics for estimated models.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frsid/errors.hpp"
#include "frsid/matops.hpp"
#include "frsid/model.hpp"
#include "frsid/simulate.hpp"
#include "frsid/timeseries.hpp"
#include "frsid/types.hpp"

namespace frsid {

namespace detail {

/// Minimum-cost assignment (Hungarian algorithm with potentials, O(n^3)).
/// Returns match[i] = column assigned to row i of the square cost matrix.
inline std::vector<Index> hungarian_assignment(const Matrix& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n)
    throw DimensionError("assignment: cost matrix must be square");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based internal arrays; row/column potentials u, v.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> way(n + 1, 0), match_col(n + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    match_col[0] = i;
    Index j0 = 0;
    std::vector<double> min_slack(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const Index i0 = match_col[static_cast<std::size_t>(j0)];
      double delta = kInf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double slack = cost(i0 - 1, j - 1) -
                             u[static_cast<std::size_t>(i0)] -
                             v[static_cast<std::size_t>(j)];
        if (slack < min_slack[static_cast<std::size_t>(j)]) {
          min_slack[static_cast<std::size_t>(j)] = slack;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (min_slack[static_cast<std::size_t>(j)] < delta) {
          delta = min_slack[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match_col[static_cast<std::size_t>(j)])] +=
              delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          min_slack[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match_col[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match_col[static_cast<std::size_t>(j0)] =
          match_col[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> row_to_col(static_cast<std::size_t>(n), -1);
  for (Index j = 1; j <= n; ++j)
    if (match_col[static_cast<std::size_t>(j)] != 0)
      row_to_col[static_cast<std::size_t>(
          match_col[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return row_to_col;
}

}  // namespace detail

/// Pairs each true eigenvalue with an estimate by minimum-cost matching on
/// |lambda_i - lambda_hat_j|.  Returns the estimates reordered to align with
/// the true list.
inline ComplexVector align_eigenvalues(const ComplexVector& truth,
                                       const ComplexVector& estimate) {
  if (truth.size() != estimate.size())
    throw DimensionError("eigenvalue alignment: list lengths differ");
  const Index n = truth.size();
  if (n == 0) throw DimensionError("eigenvalue alignment: empty lists");
  Matrix cost(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) cost(i, j) = std::abs(truth(i) - estimate(j));
  const auto match = detail::hungarian_assignment(cost);
  ComplexVector aligned(n);
  for (Index i = 0; i < n; ++i)
    aligned(i) = estimate(match[static_cast<std::size_t>(i)]);
  return aligned;
}

/// Normalized eigenvalue error with pairing diagnostics.
struct NeeResult {
  double value = 0.0;
  Index excluded = 0;  ///< true eigenvalues exactly 0, skipped in the sum
};

/// NEE = sum_i |lambda_i - lambda_hat_i|^2 / |lambda_i|^2 over Hungarian-
/// aligned pairs; true eigenvalues exactly equal to zero are excluded from
/// the sum (their relative error is undefined) and counted in `excluded`.
inline NeeResult nee_detailed(const ComplexVector& truth,
                              const ComplexVector& estimate) {
  const ComplexVector aligned = align_eigenvalues(truth, estimate);
  NeeResult result;
  for (Index i = 0; i < truth.size(); ++i) {
    const double denom = std::norm(truth(i));
    if (denom == 0.0) {
      ++result.excluded;
      continue;
    }
    result.value += std::norm(truth(i) - aligned(i)) / denom;
  }
  return result;
}

/// Scalar NEE (see nee_detailed).
inline double nee(const ComplexVector& truth, const ComplexVector& estimate) {
  return nee_detailed(truth, estimate).value;
}

/// NEE of the run-averaged eigenvalues: each run's estimates are aligned to
/// the truth, the aligned lists are averaged elementwise, and the NEE of the
/// average is returned.
inline double aggregate_nee(const ComplexVector& truth,
                            const std::vector<ComplexVector>& runs) {
  if (runs.empty()) throw DimensionError("aggregate_nee: no runs");
  ComplexVector mean = ComplexVector::Zero(truth.size());
  for (const auto& run : runs) mean += align_eigenvalues(truth, run);
  mean /= static_cast<double>(runs.size());
  return nee(truth, mean);
}

/// Validation MSE: MSE = sum_channels (1/N_v) sum_t (y_i(t) - yhat_i(t))^2,
/// with yhat the deterministic response of @p model to the validation input
/// from x0 = 0.  Throws InstabilityError if the model diverges.
struct MseResult {
  double total = 0.0;
  Vector per_channel;  ///< p entries
};

inline MseResult validation_mse(const StateSpaceModel& model,
                                const TimeSeriesData& validation) {
  validation.validate();
  if (model.m() != validation.m() || model.p() != validation.p())
    throw DimensionError("validation_mse: channel counts do not match model");
  const Matrix y_hat = simulate_deterministic(model, validation.u);
  const Matrix err = validation.y - y_hat;
  MseResult result;
  result.per_channel =
      err.rowwise().squaredNorm() / static_cast<double>(validation.n_samples());
  result.total = result.per_channel.sum();
  return result;
}

/// One-step-ahead predictor MSE: yhat(t) = C xhat(t) + D u(t) with
/// xhat(t+1) = (A - K C) xhat + (B - K D) u + K y.
inline MseResult predictor_mse(const StateSpaceModel& model,
                               const TimeSeriesData& validation) {
  validation.validate();
  if (model.m() != validation.m() || model.p() != validation.p())
    throw DimensionError("predictor_mse: channel counts do not match model");
  const Index n_samples = validation.n_samples();
  const Matrix a_pred = model.a - model.k * model.c;
  const Matrix b_pred = model.b - model.k * model.d;
  Vector x = Vector::Zero(model.n());
  Matrix err(model.p(), n_samples);
  for (Index t = 0; t < n_samples; ++t) {
    err.col(t) = validation.y.col(t) - model.c * x - model.d * validation.u.col(t);
    x = a_pred * x + b_pred * validation.u.col(t) +
        model.k * validation.y.col(t);
    if (x.cwiseAbs().maxCoeff() > 1e150)
      throw InstabilityError("predictor_mse: predictor diverged at sample " +
                             std::to_string(t));
  }
  MseResult result;
  result.per_channel =
      err.rowwise().squaredNorm() / static_cast<double>(n_samples);
  result.total = result.per_channel.sum();
  return result;
}

/// Largest-principal-angle distance sin(theta_max) between the column spaces
/// of @p a and @p b.  Bases are obtained from rank-revealing QR (wide inputs
/// are first reduced by their LQ L-factor, which preserves the column space);
/// the inputs may have different ranks, in which case the distance is taken
/// from the higher-rank space to the lower-rank one.
inline double subspace_distance(const Eigen::Ref<const Matrix>& a,
                                const Eigen::Ref<const Matrix>& b,
                                double rel_tol = 1e-12) {
  if (a.size() == 0 || b.size() == 0)
    throw DimensionError("subspace_distance: empty matrix");
  if (a.rows() != b.rows())
    throw DimensionError("subspace_distance: row counts differ");
  if (!is_finite(a) || !is_finite(b))
    throw InputError("subspace_distance: non-finite input");

  const auto basis_of = [rel_tol](const Eigen::Ref<const Matrix>& m) -> Matrix {
    Matrix compact =
        m.cols() > m.rows() ? Matrix(lq(m, /*keep_q=*/false).l) : Matrix(m);
    if (compact.norm() == 0.0)
      throw UndefinedSubspaceError("subspace_distance: zero matrix");
    Eigen::ColPivHouseholderQR<Matrix> qr(compact);
    const double max_diag = std::abs(qr.matrixR()(0, 0));
    Index rank = 0;
    const Index mn = std::min(compact.rows(), compact.cols());
    while (rank < mn && std::abs(qr.matrixR()(rank, rank)) >= rel_tol * max_diag)
      ++rank;
    Matrix q = Matrix::Identity(compact.rows(), rank);
    q.applyOnTheLeft(qr.householderQ());
    return q;
  };

  Matrix q_a = basis_of(a);
  Matrix q_b = basis_of(b);
  if (q_a.cols() < q_b.cols()) std::swap(q_a, q_b);
  // sin(theta_max) = || (I - Q_a Q_a^T) Q_b ||_2, computed from the residual
  // directly so that small angles are not lost to cancellation.
  const Matrix residual = q_b - q_a * (q_a.transpose() * q_b);
  const Vector sigma = singular_values(residual);
  return std::clamp(sigma(0), 0.0, 1.0);
}

/// Frobenius distance between the Markov-parameter sequences of two models
/// over j = 0..horizon: sqrt(sum_j ||G_1(j) - G_2(j)||_F^2).
inline double markov_error(const StateSpaceModel& lhs,
                           const StateSpaceModel& rhs, Index horizon) {
  if (lhs.m() != rhs.m() || lhs.p() != rhs.p())
    throw DimensionError("markov_error: channel counts differ");
  const auto g_lhs = markov_parameters(lhs, horizon);
  const auto g_rhs = markov_parameters(rhs, horizon);
  double sum = 0.0;
  for (std::size_t j = 0; j < g_lhs.size(); ++j)
    sum += (g_lhs[j] - g_rhs[j]).squaredNorm();
  return std::sqrt(sum);
}

/// Everything one identification run reports.
struct MetricsReport {
  std::string method;  ///< "fr2sid" or "baseline"
  Index run = 0;
  std::uint64_t seed = 0;
  Index n = 0, k = 0, m = 0, p = 0, d = 1, l = 5;
  int q = 0;
  Index n_columns = 0;   ///< N
  Index n_c = 0;         ///< sketch columns (0 for baseline)
  double act_ms = 0.0;   ///< factorization/estimation wall time
  std::optional<double> nee;
  std::optional<double> mse;
  std::optional<double> markov_err;
  std::uint64_t io_words_read = 0;
  std::uint64_t io_words_written = 0;
  std::uint64_t io_blocks_read = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["method"] = method;
    j["run"] = run;
    j["seed"] = seed;
    j["n"] = n;
    j["k"] = k;
    j["m"] = m;
    j["p"] = p;
    j["d"] = d;
    j["l"] = l;
    j["q"] = q;
    j["N"] = n_columns;
    j["Nc"] = n_c;
    j["act_ms"] = act_ms;
    if (nee) j["nee"] = *nee;
    if (mse) j["mse"] = *mse;
    if (markov_err) j["markov_err"] = *markov_err;
    j["io_words_read"] = io_words_read;
    j["io_words_written"] = io_words_written;
    j["io_blocks_read"] = io_blocks_read;
    j["warnings"] = warnings;
    return j;
  }

  /// Column order of csv_row(); documented in the README.
  static std::string csv_header() {
    return "method,run,seed,n,k,m,p,d,l,q,N,Nc,act_ms,nee,mse,markov_err,"
           "io_words_read,io_words_written,io_blocks_read";
  }

  std::string csv_row() const {
    const auto fmt = [](double value) {
      char buffer[64];
      std::snprintf(buffer, sizeof(buffer), "%.17g", value);
      return std::string(buffer);
    };
    std::string row = method + "," + std::to_string(run) + "," +
                      std::to_string(seed) + "," + std::to_string(n) + "," +
                      std::to_string(k) + "," + std::to_string(m) + "," +
                      std::to_string(p) + "," + std::to_string(d) + "," +
                      std::to_string(l) + "," + std::to_string(q) + "," +
                      std::to_string(n_columns) + "," + std::to_string(n_c) +
                      "," + fmt(act_ms) + ",";
    row += (nee ? fmt(*nee) : "") + std::string(",");
    row += (mse ? fmt(*mse) : "") + std::string(",");
    row += (markov_err ? fmt(*markov_err) : "") + std::string(",");
    row += std::to_string(io_words_read) + "," +
           std::to_string(io_words_written) + "," +
           std::to_string(io_blocks_read);
    return row;
  }
};

}  // namespace frsid
