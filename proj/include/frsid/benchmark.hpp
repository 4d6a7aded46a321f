#pragma once

// Wall-clock and IO-cost comparison: sequential blocked LQ of the full data
// matrix versus streaming compression followed by the small reduced
// factorization.  Timing covers factorization work only (synthetic data
// generation happens outside the timed regions).

#include <chrono>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "frsid/errors.hpp"
#include "frsid/hankel.hpp"
#include "frsid/identify.hpp"
#include "frsid/io_counters.hpp"
#include "frsid/matops.hpp"
#include "frsid/simulate.hpp"
#include "frsid/sketch.hpp"
#include "frsid/types.hpp"

namespace frsid {

struct BenchmarkShape {
  Index k = 0;
  Index m = 0;
  Index p = 0;
  Index d = 1;
};

/// The four reference shapes used by the factorization benchmark.
inline std::vector<BenchmarkShape> default_benchmark_shapes() {
  return {{10, 2, 2, 5}, {20, 5, 5, 10}, {60, 10, 5, 15}, {100, 10, 10, 20}};
}

/// Closed-form slow-memory word count of the streaming compression:
/// (q+2) * 2k(m+p) * N + l * N + 4k^2(m+p)^2 + 2kl(m+p).
inline std::uint64_t sdc_word_cost(Index k, Index m, Index p, Index l, int q,
                                   Index n_columns) {
  const std::uint64_t rows = static_cast<std::uint64_t>(2 * k * (m + p));
  const std::uint64_t n = static_cast<std::uint64_t>(n_columns);
  return (static_cast<std::uint64_t>(q) + 2) * rows * n +
         static_cast<std::uint64_t>(l) * n +
         rows * (rows + static_cast<std::uint64_t>(l));
}

struct BenchmarkResult {
  BenchmarkShape shape;
  Index n_columns = 0;
  Index n_c = 0;
  int q = 0;
  Index repeats = 1;
  bool full_refused = false;  ///< full-matrix side exceeded the memory cap
  double full_ms = std::numeric_limits<double>::infinity();  ///< sequential LQ
  double sketch_ms = 0.0;  ///< streaming compression
  double rqr_ms = 0.0;     ///< reduced factorization of the compressed matrix
  double speedup = std::numeric_limits<double>::infinity();
  IoCounters io;                     ///< compression-side counters, one repeat
  std::uint64_t dm_formula_words = 0;  ///< closed-form word count

  double compressed_ms() const { return sketch_ms + rqr_ms; }
};

/// Benchmark options; the memory cap applies to the full-matrix side, whose
/// in-core object is the 2k(m+p) x N data matrix itself.
struct BenchmarkOptions {
  Index n_columns = 100000;
  int q = 0;
  Index l = 5;
  Index repeats = 10;
  std::uint64_t seed = 0;
  std::uint64_t memory_cap_bytes = 4ULL << 30;
};

/// Times both factorization routes on white-noise data of the given shape.
inline BenchmarkResult run_benchmark(const BenchmarkShape& shape,
                                     const BenchmarkOptions& options) {
  if (shape.k < 1 || shape.m < 1 || shape.p < 1 || shape.d < 1)
    throw ConfigError("benchmark: k, m, p, d must be positive");
  if (options.repeats < 1)
    throw ConfigError("benchmark: repeats must be positive");
  const Index n_samples = options.n_columns + 2 * shape.k - 1;

  TimeSeriesData ts;
  ts.u = make_input(shape.m, n_samples, InputKind::kWhiteGaussian,
                    derive_seed(options.seed, 0x51));
  ts.y = make_input(shape.p, n_samples, InputKind::kWhiteGaussian,
                    derive_seed(options.seed, 0x52));

  SketchConfig cfg;
  cfg.k = shape.k;
  cfg.l = options.l;
  cfg.q = options.q;
  cfg.d = shape.d;

  BenchmarkResult result;
  result.shape = shape;
  result.n_columns = options.n_columns;
  result.n_c = cfg.sketch_columns(shape.m, shape.p);
  result.q = options.q;
  result.repeats = options.repeats;
  result.dm_formula_words = sdc_word_cost(shape.k, shape.m, shape.p,
                                          options.l, options.q,
                                          options.n_columns);

  const Index rows = 2 * shape.k * (shape.m + shape.p);
  const std::uint64_t full_bytes = 8ULL * static_cast<std::uint64_t>(rows) *
                                   static_cast<std::uint64_t>(options.n_columns);
  result.full_refused = full_bytes > options.memory_cap_bytes;

  const BlockPartition part(options.n_columns, shape.d);
  double full_total = 0.0;
  double sketch_total = 0.0;
  double rqr_total = 0.0;

  for (Index r = 0; r < options.repeats; ++r) {
    if (!result.full_refused) {
      const detail::StageTimer timer;
      BlockedLqAccumulator acc(rows);
      for (Index i = 0; i < part.d; ++i)
        acc.absorb(hankel_block(ts, shape.k, part, i).joint());
      // Touch the factor so the work cannot be elided.
      volatile double sink = acc.l()(rows - 1, rows - 1);
      (void)sink;
      full_total += timer.elapsed_ms();
    }

    cfg.seed = derive_seed(options.seed, 0x60 + static_cast<std::uint64_t>(r));
    IoCounters io;
    const detail::StageTimer sketch_timer;
    const SketchedData sketch = sketch_stream(ts, cfg, &io);
    const double sketch_ms = sketch_timer.elapsed_ms();

    const detail::StageTimer rqr_timer;
    const LqResult reduced = lq(sketch.joint(), /*keep_q=*/false);
    volatile double sink = reduced.l(rows - 1, rows - 1);
    (void)sink;
    const double rqr_ms = rqr_timer.elapsed_ms();

    sketch_total += sketch_ms;
    rqr_total += rqr_ms;
    if (r == 0) result.io = io;
  }

  const double n_repeats = static_cast<double>(options.repeats);
  result.sketch_ms = sketch_total / n_repeats;
  result.rqr_ms = rqr_total / n_repeats;
  if (!result.full_refused) {
    result.full_ms = full_total / n_repeats;
    result.speedup = result.full_ms / result.compressed_ms();
  }
  return result;
}

}  // namespace frsid
