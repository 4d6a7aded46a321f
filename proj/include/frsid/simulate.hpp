#pragma once

// Synthetic data generation: random multi-scale systems, excitation inputs,
// and innovation-form simulation with SNR-calibrated noise.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "frsid/errors.hpp"
#include "frsid/matops.hpp"
#include "frsid/model.hpp"
#include "frsid/rng.hpp"
#include "frsid/timeseries.hpp"
#include "frsid/types.hpp"

namespace frsid {

/// Recipe for a random test system with widely separated time scales.
///
/// Continuous-time poles: one drawn uniformly from fast_range, one from
/// slow_range, the remaining n - 2 log-uniform in magnitude between the two
/// draws (all real and negative).  Discretization is exact: lambda_d =
/// exp(lambda_c * T_s), with T_s defaulting to 0.5 / |fastest pole|.
struct SystemSpec {
  Index n = 2;
  Index m = 1;
  Index p = 1;
  std::uint64_t seed = 0;
  double fast_range[2] = {-100.0, -50.0};   ///< fast continuous poles
  double slow_range[2] = {-0.01, -0.001};   ///< slow continuous poles
  double sample_time = 0.0;                 ///< T_s; <= 0 selects the default
  bool complex_pairs = false;  ///< pair mid-range poles into conjugate blocks

  void validate() const {
    if (n < 1 || m < 1 || p < 1)
      throw ConfigError("system spec: n, m, p must be positive");
    if (fast_range[0] > fast_range[1] || fast_range[1] >= 0.0)
      throw ConfigError("system spec: fast_range must be negative and ordered");
    if (slow_range[0] > slow_range[1] || slow_range[1] >= 0.0)
      throw ConfigError("system spec: slow_range must be negative and ordered");
    if (fast_range[1] > slow_range[0])
      throw ConfigError("system spec: fast poles must lie left of slow poles");
  }
};

namespace detail {

inline double uniform_in(Xoshiro256& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.next_unit();
}

inline Matrix random_matrix(GaussianStream& stream, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = stream.next();
  return m;
}

inline double spectral_radius(const Matrix& m) {
  return Eigen::EigenSolver<Matrix>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Draws a random discrete-time system per @p spec.  The innovation gain K
/// is rescaled by bisection until A - K C is stable; eta defaults to I_p.
inline StateSpaceModel generate_system(const SystemSpec& spec) {
  spec.validate();
  Xoshiro256 rng(derive_seed(spec.seed, 0xA));
  GaussianStream gauss(derive_seed(spec.seed, 0xB));

  // Continuous poles: fast, slow, then log-uniform magnitudes in between.
  const double fast =
      detail::uniform_in(rng, spec.fast_range[0], spec.fast_range[1]);
  const double slow =
      detail::uniform_in(rng, spec.slow_range[0], spec.slow_range[1]);
  std::vector<double> poles;
  poles.push_back(fast);
  if (spec.n >= 2) poles.push_back(slow);
  for (Index i = 2; i < spec.n; ++i) {
    const double log_mag = detail::uniform_in(rng, std::log(-slow),
                                              std::log(-fast));
    poles.push_back(-std::exp(log_mag));
  }

  const double t_s =
      spec.sample_time > 0.0 ? spec.sample_time : 0.5 / std::abs(fast);

  StateSpaceModel model;
  model.a = Matrix::Zero(spec.n, spec.n);
  if (!spec.complex_pairs || spec.n < 4) {
    for (Index i = 0; i < spec.n; ++i)
      model.a(i, i) = std::exp(poles[static_cast<std::size_t>(i)] * t_s);
  } else {
    // Keep the fast and slow poles real; pair mid-range poles into
    // conjugate 2x2 blocks (any odd leftover stays real).
    model.a(0, 0) = std::exp(poles[0] * t_s);
    model.a(1, 1) = std::exp(poles[1] * t_s);
    Index i = 2;
    while (i + 1 < spec.n) {
      const double real_part = poles[static_cast<std::size_t>(i)];
      const double angle =
          detail::uniform_in(rng, 0.1, 1.0) * std::abs(real_part);
      const Complex lambda =
          std::exp(Complex(real_part, angle) * t_s);
      model.a(i, i) = lambda.real();
      model.a(i, i + 1) = lambda.imag();
      model.a(i + 1, i) = -lambda.imag();
      model.a(i + 1, i + 1) = lambda.real();
      i += 2;
    }
    if (i < spec.n) model.a(i, i) = std::exp(poles[static_cast<std::size_t>(i)] * t_s);
  }

  model.b = detail::random_matrix(gauss, spec.n, spec.m);
  model.c = detail::random_matrix(gauss, spec.p, spec.n);
  model.d = detail::random_matrix(gauss, spec.p, spec.m);
  model.k = detail::random_matrix(gauss, spec.n, spec.p);
  model.eta = Matrix::Identity(spec.p, spec.p);

  // Rescale K so the predictor A - K C is stable.  s = 0 always works
  // (A itself is stable), so bisection on the scale cannot fail.
  const double rho_a = detail::spectral_radius(model.a);
  const double target = std::max(0.98, 0.5 * (1.0 + rho_a));
  if (detail::spectral_radius(model.a - model.k * model.c) > target) {
    double lo = 0.0;
    double hi = 1.0;
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (detail::spectral_radius(model.a - mid * model.k * model.c) > target)
        hi = mid;
      else
        lo = mid;
    }
    if (lo == 0.0)
      throw GenerationError("generate_system: could not stabilize A - K C");
    model.k *= lo;
  }
  model.validate();
  return model;
}

/// Excitation input kinds for make_input.
enum class InputKind {
  kWhiteGaussian,  ///< i.i.d. N(0, 1) per channel
  kPrbs,           ///< i.i.d. equiprobable {-1, +1}
};

/// Draws an m x N_t excitation input.
inline Matrix make_input(Index m, Index n_samples, InputKind kind,
                         std::uint64_t seed) {
  if (m < 1 || n_samples < 1)
    throw ConfigError("make_input: m and N_t must be positive");
  Matrix u(m, n_samples);
  if (kind == InputKind::kWhiteGaussian) {
    GaussianStream stream(derive_seed(seed, 0x11));
    for (Index t = 0; t < n_samples; ++t)
      for (Index i = 0; i < m; ++i) u(i, t) = stream.next();
  } else {
    Xoshiro256 rng(derive_seed(seed, 0x12));
    for (Index t = 0; t < n_samples; ++t)
      for (Index i = 0; i < m; ++i)
        u(i, t) = (rng.next() >> 63) != 0 ? 1.0 : -1.0;
  }
  return u;
}

/// One simulated trajectory plus the realized innovation sequence.
struct SimulationRun {
  TimeSeriesData data;   ///< u and the noisy outputs y
  Matrix innovations;    ///< p x N_t realized e(t)
  Matrix eta;            ///< innovation covariance actually used
  double snr_db = std::numeric_limits<double>::infinity();  ///< realized SNR
};

namespace detail {

constexpr double kStateLimit = 1e150;

/// Simulates x(t+1) = A x + B u + K e, y = C x + D u + e from x0 = 0.
inline Matrix simulate_response(const StateSpaceModel& model, const Matrix& u,
                                const Matrix* e) {
  const Index n_samples = u.cols();
  Matrix y(model.p(), n_samples);
  Vector x = Vector::Zero(model.n());
  for (Index t = 0; t < n_samples; ++t) {
    y.col(t) = model.c * x + model.d * u.col(t);
    if (e != nullptr) y.col(t) += e->col(t);
    x = model.a * x + model.b * u.col(t);
    if (e != nullptr) x += model.k * e->col(t);
    if (x.cwiseAbs().maxCoeff() > kStateLimit)
      throw InstabilityError("simulate: state diverged at sample " +
                             std::to_string(t));
  }
  if (!is_finite(y)) throw InstabilityError("simulate: non-finite output");
  return y;
}

}  // namespace detail

/// Deterministic response of @p model to @p u (no noise), from x0 = 0.
inline Matrix simulate_deterministic(const StateSpaceModel& model,
                                     const Eigen::Ref<const Matrix>& u) {
  model.validate();
  if (u.rows() != model.m())
    throw DimensionError("simulate: input has " + std::to_string(u.rows()) +
                         " channels, model expects " +
                         std::to_string(model.m()));
  if (!is_finite(u)) throw InputError("simulate: non-finite input");
  return detail::simulate_response(model, u, nullptr);
}

/// Simulates @p model with innovation covariance chol_eta * chol_eta^T
/// (pass the already-factored lower factor).  No SNR calibration.
inline SimulationRun simulate_with_eta(const StateSpaceModel& model,
                                       const Eigen::Ref<const Matrix>& u,
                                       const Eigen::Ref<const Matrix>& eta,
                                       std::uint64_t seed) {
  model.validate();
  if (eta.rows() != model.p() || eta.cols() != model.p())
    throw DimensionError("simulate: eta must be p x p");
  const Matrix omega = cholesky_lower(eta);
  const Index n_samples = u.cols();
  GaussianStream stream(derive_seed(seed, 0x21));
  Matrix e(model.p(), n_samples);
  for (Index t = 0; t < n_samples; ++t)
    for (Index i = 0; i < model.p(); ++i) e(i, t) = stream.next();
  e = omega * e;

  SimulationRun run;
  run.data.u = u;
  run.data.y = detail::simulate_response(model, u, &e);
  run.innovations = std::move(e);
  run.eta = eta;
  const Matrix y_det = detail::simulate_response(model, u, nullptr);
  const double p_det = y_det.squaredNorm();
  const double p_noise = (run.data.y - y_det).squaredNorm();
  run.snr_db = p_noise > 0.0
                   ? 10.0 * std::log10(p_det / p_noise)
                   : std::numeric_limits<double>::infinity();
  return run;
}

/// Simulates @p model under input @p u with isotropic innovations whose
/// variance is calibrated so the channel-averaged ratio of noise-free output
/// power to noise-induced output power matches @p snr_db.  Pass +infinity
/// for a noise-free run.
inline SimulationRun simulate(const StateSpaceModel& model,
                              const Eigen::Ref<const Matrix>& u,
                              double snr_db, std::uint64_t seed) {
  model.validate();
  if (u.rows() != model.m())
    throw DimensionError("simulate: input has " + std::to_string(u.rows()) +
                         " channels, model expects " +
                         std::to_string(model.m()));
  if (!is_finite(u)) throw InputError("simulate: non-finite input");
  if (std::isnan(snr_db)) throw ConfigError("simulate: snr_db is NaN");

  const Index n_samples = u.cols();
  const Matrix y_det = detail::simulate_response(model, u, nullptr);

  SimulationRun run;
  run.data.u = u;
  if (std::isinf(snr_db) && snr_db > 0.0) {
    run.data.y = y_det;
    run.innovations = Matrix::Zero(model.p(), n_samples);
    run.eta = Matrix::Zero(model.p(), model.p());
    run.snr_db = std::numeric_limits<double>::infinity();
    return run;
  }

  // Unit-variance noise path; by linearity the final output is
  // y_det + sigma * y_unit, so one simulation calibrates sigma exactly.
  GaussianStream stream(derive_seed(seed, 0x21));
  Matrix eps(model.p(), n_samples);
  for (Index t = 0; t < n_samples; ++t)
    for (Index i = 0; i < model.p(); ++i) eps(i, t) = stream.next();
  Matrix y_unit(model.p(), n_samples);
  {
    Vector x = Vector::Zero(model.n());
    for (Index t = 0; t < n_samples; ++t) {
      y_unit.col(t) = model.c * x + eps.col(t);
      x = model.a * x + model.k * eps.col(t);
      if (x.cwiseAbs().maxCoeff() > detail::kStateLimit)
        throw InstabilityError("simulate: noise path diverged at sample " +
                               std::to_string(t));
    }
  }

  const double p_det = y_det.squaredNorm() / static_cast<double>(y_det.size());
  const double p_unit =
      y_unit.squaredNorm() / static_cast<double>(y_unit.size());
  if (p_unit <= 0.0)
    throw ConfigError("simulate: degenerate noise path (p = 0 power)");
  if (p_det <= 0.0)
    throw ConfigError(
        "simulate: zero deterministic output power; SNR is undefined");
  const double sigma2 = p_det / (p_unit * std::pow(10.0, snr_db / 10.0));
  const double sigma = std::sqrt(sigma2);

  run.data.y = y_det + sigma * y_unit;
  run.innovations = sigma * eps;
  run.eta = sigma2 * Matrix::Identity(model.p(), model.p());
  run.snr_db = snr_db;  // exact by construction on this realization
  if (!is_finite(run.data.y)) throw InstabilityError("simulate: non-finite output");
  return run;
}

}  // namespace frsid
