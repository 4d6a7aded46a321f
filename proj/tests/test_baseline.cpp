#include <cmath>

#include "frsid/baseline.hpp"
#include "frsid/identify.hpp"
#include "frsid/metrics.hpp"
#include "frsid/simulate.hpp"
#include "test_common.hpp"

using namespace frsid;
using frsid::test::random_matrix;

namespace {

StateSpaceModel random_model(Index n, Index m, Index p, std::uint64_t seed) {
  SystemSpec spec;
  spec.n = n;
  spec.m = m;
  spec.p = p;
  spec.seed = seed;
  return generate_system(spec);
}

TimeSeriesData noise_free_data(const StateSpaceModel& model, Index n_samples,
                               std::uint64_t seed) {
  TimeSeriesData ts;
  ts.u = make_input(model.m(), n_samples, InputKind::kWhiteGaussian, seed);
  ts.y = simulate_deterministic(model, ts.u);
  return ts;
}

}  // namespace

TEST_CASE("conventional pipeline is exact on noise-free data", "[baseline]") {
  const StateSpaceModel model = random_model(2, 1, 1, 301);
  const TimeSeriesData ts = noise_free_data(model, 10000, 303);
  BaselineConfig cfg;
  cfg.k = 4;
  const IdentifyResult result = run_conventional(ts, cfg);
  CHECK(result.diagnostics.order == 2);
  CHECK(nee(model.poles(), result.model.poles()) <= 1e-10);
  CHECK(validation_mse(result.model, ts).total <= 1e-10);
}

TEST_CASE("both pipelines agree on the dynamics", "[baseline]") {
  const StateSpaceModel model = random_model(4, 2, 2, 307);
  const TimeSeriesData ts = noise_free_data(model, 8000, 311);
  BaselineConfig base_cfg;
  base_cfg.k = 6;
  const IdentifyResult conventional = run_conventional(ts, base_cfg);
  IdentifyConfig fast_cfg;
  fast_cfg.sketch.k = 6;
  fast_cfg.sketch.seed = 313;
  const IdentifyResult randomized = run_fr2sid(ts, fast_cfg);
  CHECK(nee(conventional.model.poles(), randomized.model.poles()) <= 1e-6);
  // First 2k Markov parameters coincide between the two methods.
  CHECK(markov_error(conventional.model, randomized.model, 12) <= 1e-8);
}

TEST_CASE("streaming block count does not change the conventional result",
          "[baseline]") {
  const StateSpaceModel model = random_model(3, 1, 2, 317);
  const TimeSeriesData ts = noise_free_data(model, 5000, 331);
  BaselineConfig cfg;
  cfg.k = 5;
  const IdentifyResult whole = run_conventional(ts, cfg);
  cfg.d = 3;
  const IdentifyResult blocked = run_conventional(ts, cfg);
  CHECK(nee(whole.model.poles(), blocked.model.poles()) <= 1e-12);
  CHECK(markov_error(whole.model, blocked.model, 10) <= 1e-10);
}

TEST_CASE("memory cap refusal is deterministic and informative",
          "[baseline]") {
  const StateSpaceModel model = random_model(2, 1, 1, 337);
  const TimeSeriesData ts = noise_free_data(model, 20000, 347);
  BaselineConfig cfg;
  cfg.k = 10;
  cfg.memory_cap_bytes = 1 << 20;  // 1 MiB, far below the working set
  const Index n_columns = hankel_columns(ts.n_samples(), cfg.k);
  const std::uint64_t predicted =
      conventional_footprint_bytes(cfg.k, 1, 1, n_columns);
  REQUIRE(predicted > cfg.memory_cap_bytes);
  try {
    run_conventional(ts, cfg);
    FAIL("expected MemoryCapError");
  } catch (const MemoryCapError& e) {
    CHECK(e.predicted_bytes == predicted);
    CHECK(e.cap_bytes == cfg.memory_cap_bytes);
    CHECK(std::string(e.what()).find(std::to_string(predicted)) !=
          std::string::npos);
  }
  // A cap exactly at the footprint admits the run.
  cfg.memory_cap_bytes = predicted;
  CHECK_NOTHROW(run_conventional(ts, cfg));
}

TEST_CASE("bd regression reduces to least squares for a static system",
          "[baseline]") {
  const Index m = 2, p = 2, n_samples = 500;
  const Matrix d_true = random_matrix(p, m, 349);
  TimeSeriesData ts;
  ts.u = make_input(m, n_samples, InputKind::kWhiteGaussian, 353);
  ts.y = d_true * ts.u;
  const Matrix a(0, 0);
  const Matrix c(p, 0);
  const BdRegressionResult reg = estimate_bd_regression(a, c, ts);
  CHECK(reg.b.rows() == 0);
  CHECK((reg.d - d_true).norm() <= 1e-10 * d_true.norm());
}

TEST_CASE("bd regression recovers b and d given the true dynamics",
          "[baseline]") {
  const StateSpaceModel model = random_model(2, 1, 1, 359);
  const TimeSeriesData ts = noise_free_data(model, 4000, 367);
  const BdRegressionResult reg =
      estimate_bd_regression(model.a, model.c, ts);
  StateSpaceModel estimated = model;
  estimated.b = reg.b;
  estimated.d = reg.d;
  CHECK(markov_error(model, estimated, 10) <= 1e-8);
  CHECK(reg.x0.norm() <= 1e-6);  // simulation starts from the origin
}

TEST_CASE("bd regression cost grows linearly in the record length",
          "[baseline]") {
  const StateSpaceModel model = random_model(3, 2, 2, 373);
  const TimeSeriesData short_ts = noise_free_data(model, 1000, 379);
  const TimeSeriesData long_ts = noise_free_data(model, 3000, 379);
  const std::uint64_t f1 =
      estimate_bd_regression(model.a, model.c, short_ts).flops;
  const std::uint64_t f3 =
      estimate_bd_regression(model.a, model.c, long_ts).flops;
  CHECK(f3 == 3 * f1);
}

TEST_CASE("full-regression variant matches the structural path when exact",
          "[baseline]") {
  const StateSpaceModel model = random_model(3, 2, 1, 383);
  const TimeSeriesData ts = noise_free_data(model, 4000, 389);
  BaselineConfig cfg;
  cfg.k = 5;
  const IdentifyResult structural = run_conventional(ts, cfg);
  cfg.bd_method = BdMethod::kFullRegression;
  const IdentifyResult regression = run_conventional(ts, cfg);
  CHECK(markov_error(structural.model, regression.model, 10) <= 1e-8);
}

TEST_CASE("baseline validates its configuration", "[baseline]") {
  const StateSpaceModel model = random_model(2, 1, 1, 397);
  const TimeSeriesData ts = noise_free_data(model, 1000, 401);
  BaselineConfig cfg;
  cfg.k = 0;
  CHECK_THROWS_AS(run_conventional(ts, cfg), ConfigError);
  cfg.k = 4;
  cfg.d = 0;
  CHECK_THROWS_AS(run_conventional(ts, cfg), ConfigError);
}

TEST_CASE("baseline rejects records shorter than the horizon needs",
          "[baseline]") {
  const StateSpaceModel model = random_model(2, 1, 1, 409);
  const TimeSeriesData ts = noise_free_data(model, 30, 419);
  BaselineConfig cfg;
  cfg.k = 8;  // needs N >= 2k(m+p) = 32 columns, record gives 15
  CHECK_THROWS_AS(run_conventional(ts, cfg), InsufficientDataError);
}
