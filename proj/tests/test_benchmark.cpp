#include <cmath>

#include "frsid/benchmark.hpp"
#include "test_common.hpp"

using namespace frsid;

TEST_CASE("reference shapes and compressed width", "[benchmark]") {
  const auto shapes = default_benchmark_shapes();
  REQUIRE(shapes.size() == 4);
  CHECK(shapes[0].k == 10);
  CHECK(shapes[3].k == 100);

  BenchmarkOptions options;
  options.n_columns = 2000;
  options.repeats = 1;
  const BenchmarkResult result = run_benchmark(shapes[0], options);
  // 2k(m+p) = 80 rows compress to N_c = 80 + 5 columns.
  CHECK(result.n_c == 85);
  CHECK(result.n_columns == 2000);
  CHECK_FALSE(result.full_refused);
  CHECK(result.full_ms > 0.0);
  CHECK(result.sketch_ms > 0.0);
  CHECK(std::abs(result.speedup -
                 result.full_ms / (result.sketch_ms + result.rqr_ms)) <=
        1e-12 * result.speedup);
}

TEST_CASE("io counters reproduce the closed-form word count", "[benchmark]") {
  const BenchmarkShape shape{10, 2, 2, 4};
  for (int q : {0, 1}) {
    BenchmarkOptions options;
    options.n_columns = 3000;
    options.q = q;
    options.repeats = 1;
    const BenchmarkResult result = run_benchmark(shape, options);
    const std::uint64_t measured =
        result.io.words_read + result.io.words_written;
    CHECK(measured == result.dm_formula_words);
    CHECK(result.dm_formula_words ==
          sdc_word_cost(10, 2, 2, 5, q, options.n_columns));
    CHECK(result.io.blocks_read == 4u);
  }
}

TEST_CASE("word cost formula matches its definition", "[benchmark]") {
  // (q+2) * 2k(m+p) * N + l * N + 4k^2(m+p)^2 + 2kl(m+p)
  const std::uint64_t words = sdc_word_cost(10, 2, 2, 5, 1, 1000);
  const std::uint64_t rows = 2 * 10 * 4;
  CHECK(words == 3 * rows * 1000 + 5 * 1000 + rows * rows + rows * 5);
}

TEST_CASE("power iteration costs measurably more than a plain sketch",
          "[benchmark]") {
  const BenchmarkShape shape{10, 2, 2, 5};
  BenchmarkOptions options;
  options.n_columns = 50000;
  options.repeats = 3;

  options.q = 0;
  const BenchmarkResult plain = run_benchmark(shape, options);
  options.q = 1;
  const BenchmarkResult powered = run_benchmark(shape, options);

  CHECK(powered.sketch_ms > plain.sketch_ms);
  // The q = 1 pass reads the data once more than q = 0 by construction.
  CHECK(powered.io.words_read > plain.io.words_read);
}

TEST_CASE("memory cap refuses the full-matrix side only", "[benchmark]") {
  const BenchmarkShape shape{10, 2, 2, 4};
  BenchmarkOptions options;
  options.n_columns = 4000;
  options.repeats = 1;
  // Full side needs 80 * 4000 * 8 bytes = 2.56 MB; cap below that.
  options.memory_cap_bytes = 1 << 20;
  const BenchmarkResult result = run_benchmark(shape, options);
  CHECK(result.full_refused);
  CHECK(std::isinf(result.full_ms));
  CHECK(std::isinf(result.speedup));
  CHECK(result.sketch_ms > 0.0);  // compressed side still ran
  CHECK(result.io.words_read > 0u);
}

TEST_CASE("benchmark validates its inputs", "[benchmark]") {
  BenchmarkOptions options;
  options.n_columns = 1000;
  CHECK_THROWS_AS(run_benchmark(BenchmarkShape{0, 2, 2, 1}, options),
                  ConfigError);
  options.repeats = 0;
  CHECK_THROWS_AS(run_benchmark(BenchmarkShape{10, 2, 2, 1}, options),
                  ConfigError);
}
