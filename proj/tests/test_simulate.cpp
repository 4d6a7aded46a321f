#include <cmath>

#include "frsid/metrics.hpp"
#include "frsid/simulate.hpp"
#include "test_common.hpp"

using namespace frsid;
using frsid::test::rel_err;

TEST_CASE("scalar pole maps through the exponential", "[simulate]") {
  SystemSpec spec;
  spec.n = 1;
  spec.m = 1;
  spec.p = 1;
  spec.fast_range[0] = spec.fast_range[1] = -1.0;
  spec.sample_time = 0.1;
  spec.seed = 1;
  const StateSpaceModel model = generate_system(spec);
  CHECK(std::abs(model.a(0, 0) - std::exp(-0.1)) <= 1e-12);
}

TEST_CASE("generated systems are stable with a stable predictor",
          "[simulate]") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    SystemSpec spec;
    spec.n = 10;
    spec.m = 2;
    spec.p = 2;
    spec.seed = seed;
    const StateSpaceModel model = generate_system(spec);
    CHECK(model.poles().cwiseAbs().maxCoeff() < 1.0);
    CHECK(model.predictor_spectral_radius() < 1.0);
  }
}

TEST_CASE("system generation is deterministic in the seed", "[simulate]") {
  SystemSpec spec;
  spec.n = 5;
  spec.m = 1;
  spec.p = 2;
  spec.seed = 77;
  const StateSpaceModel a = generate_system(spec);
  const StateSpaceModel b = generate_system(spec);
  spec.seed = 78;
  const StateSpaceModel c = generate_system(spec);
  CHECK(a.a == b.a);
  CHECK(a.b == b.b);
  CHECK((a.a - c.a).norm() > 0.0);
}

TEST_CASE("complex pole pairs appear as 2x2 blocks when enabled",
          "[simulate]") {
  SystemSpec spec;
  spec.n = 6;
  spec.m = 1;
  spec.p = 1;
  spec.seed = 5;
  spec.complex_pairs = true;
  const StateSpaceModel model = generate_system(spec);
  const ComplexVector poles = model.poles();
  CHECK(poles.cwiseAbs().maxCoeff() < 1.0);
  double max_imag = 0.0;
  for (Index i = 0; i < poles.size(); ++i)
    max_imag = std::max(max_imag, std::abs(poles(i).imag()));
  CHECK(max_imag > 0.0);
}

TEST_CASE("one-step delay system", "[simulate]") {
  StateSpaceModel model;
  model.a = Matrix::Zero(1, 1);
  model.b = Matrix::Ones(1, 1);
  model.c = Matrix::Ones(1, 1);
  model.d = Matrix::Zero(1, 1);
  model.k = Matrix::Zero(1, 1);
  model.eta = Matrix::Zero(1, 1);
  Matrix u(1, 3);
  u << 1, 0, 0;
  const Matrix y = simulate_deterministic(model, u);
  CHECK(y(0, 0) == 0.0);
  CHECK(y(0, 1) == 1.0);
  CHECK(y(0, 2) == 0.0);
}

TEST_CASE("impulse response equals the Markov parameters", "[simulate]") {
  SystemSpec spec;
  spec.n = 4;
  spec.m = 2;
  spec.p = 2;
  spec.seed = 9;
  const StateSpaceModel model = generate_system(spec);
  const Index steps = 12;
  const auto g = markov_parameters(model, steps - 1);
  for (Index channel = 0; channel < 2; ++channel) {
    Matrix u = Matrix::Zero(2, steps);
    u(channel, 0) = 1.0;
    const Matrix y = simulate_deterministic(model, u);
    for (Index t = 0; t < steps; ++t)
      CHECK((y.col(t) - g[t].col(channel)).norm() <= 1e-10);
  }
}

TEST_CASE("requested snr is realized within a decibel", "[simulate]") {
  SystemSpec spec;
  spec.n = 3;
  spec.m = 1;
  spec.p = 2;
  spec.seed = 33;
  const StateSpaceModel model = generate_system(spec);
  const Matrix u = make_input(1, 100000, InputKind::kWhiteGaussian, 101);
  const SimulationRun run = simulate(model, u, 40.0, 2024);
  const Matrix y_det = simulate_deterministic(model, u);
  const Matrix noise = run.data.y - y_det;
  const double realized =
      10.0 * std::log10(y_det.squaredNorm() / noise.squaredNorm());
  CHECK(std::abs(realized - 40.0) <= 1.0);
  CHECK(run.eta(0, 0) > 0.0);
}

TEST_CASE("infinite snr is noise-free", "[simulate]") {
  SystemSpec spec;
  spec.n = 2;
  spec.m = 1;
  spec.p = 1;
  spec.seed = 41;
  const StateSpaceModel model = generate_system(spec);
  const Matrix u = make_input(1, 500, InputKind::kWhiteGaussian, 55);
  const SimulationRun run =
      simulate(model, u, std::numeric_limits<double>::infinity(), 1);
  CHECK(run.innovations.norm() == 0.0);
  CHECK(rel_err(run.data.y, simulate_deterministic(model, u)) <= 1e-15);
}

TEST_CASE("simulation replay is bit-identical", "[simulate]") {
  SystemSpec spec;
  spec.n = 3;
  spec.m = 2;
  spec.p = 1;
  spec.seed = 47;
  const StateSpaceModel model = generate_system(spec);
  const Matrix u = make_input(2, 2000, InputKind::kWhiteGaussian, 61);
  const SimulationRun a = simulate(model, u, 30.0, 7);
  const SimulationRun b = simulate(model, u, 30.0, 7);
  CHECK(a.data.y == b.data.y);
  CHECK(a.innovations == b.innovations);
}

TEST_CASE("white gaussian input has standard moments", "[simulate]") {
  const Matrix u = make_input(1, 100000, InputKind::kWhiteGaussian, 71);
  const double mean = u.mean();
  const double var = (u.array() - mean).square().mean();
  CHECK(std::abs(mean) <= 0.02);
  CHECK(std::abs(var - 1.0) <= 0.02);
}

TEST_CASE("prbs input uses a two-letter alphabet", "[simulate]") {
  const Matrix u = make_input(2, 5000, InputKind::kPrbs, 73);
  for (Index i = 0; i < u.rows(); ++i)
    for (Index j = 0; j < u.cols(); ++j)
      CHECK(std::abs(u(i, j)) == 1.0);
  CHECK(u == make_input(2, 5000, InputKind::kPrbs, 73));
}

TEST_CASE("inputs are persistently exciting", "[simulate]") {
  // Sample covariance of 2k stacked lags must be full rank.
  const Index k = 6, n_t = 2000;
  for (InputKind kind : {InputKind::kWhiteGaussian, InputKind::kPrbs}) {
    const Matrix u = make_input(1, n_t, kind, 79);
    const Index lags = 2 * k, n = n_t - lags + 1;
    Matrix stacked(lags, n);
    for (Index r = 0; r < lags; ++r) stacked.row(r) = u.block(0, r, 1, n);
    const Matrix cov = stacked * stacked.transpose() / double(n);
    CHECK(numerical_rank(singular_values(cov), 1e-8) == lags);
  }
}

TEST_CASE("injected innovations are white", "[simulate]") {
  SystemSpec spec;
  spec.n = 2;
  spec.m = 1;
  spec.p = 1;
  spec.seed = 83;
  const StateSpaceModel model = generate_system(spec);
  const Index n_t = 40000;
  const Matrix u = make_input(1, n_t, InputKind::kWhiteGaussian, 89);
  const SimulationRun run = simulate(model, u, 20.0, 97);
  const Vector e = run.innovations.row(0).transpose();
  const double var = e.squaredNorm() / double(n_t);
  for (Index lag = 1; lag <= 20; ++lag) {
    const double acf = (e.head(n_t - lag).dot(e.tail(n_t - lag))) /
                       (double(n_t) * var);
    CHECK(std::abs(acf) <= 4.0 / std::sqrt(double(n_t)));
  }
}

TEST_CASE("unstable model simulation raises an instability error",
          "[simulate]") {
  StateSpaceModel model;
  model.a = 2.0 * Matrix::Identity(1, 1);
  model.b = Matrix::Ones(1, 1);
  model.c = Matrix::Ones(1, 1);
  model.d = Matrix::Zero(1, 1);
  model.k = Matrix::Zero(1, 1);
  model.eta = Matrix::Zero(1, 1);
  const Matrix u = Matrix::Ones(1, 2000);
  CHECK_THROWS_AS(simulate_deterministic(model, u), InstabilityError);
}

TEST_CASE("spec validation rejects bad dimensions", "[simulate]") {
  SystemSpec spec;
  spec.n = 0;
  spec.m = 1;
  spec.p = 1;
  CHECK_THROWS_AS(generate_system(spec), ConfigError);
}
