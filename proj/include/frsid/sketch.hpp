#pragma once

// Streaming randomized compression of the Hankel matrices.
//
// Each of the four Hankel matrices X in {U_past, U_future, Y_past, Y_future}
// (X has N columns) is compressed with one shared Gaussian matrix
// C (N x N_c, entries i.i.d. N(0, 1/N_c), N_c = 2k(m+p) + l):
//
//   sketch(X) = (X X^T)^q * X * C,   q in {0, 1},
//
// computed in a single pass over column blocks by co-accumulating the Gram
// matrix S_X = sum_i X_i X_i^T (only when q = 1) and the raw sketch
// G_X = sum_i X_i C_i, then returning S_X^q * G_X.  The random rows of C are
// derived per global column index, so the result is independent of the block
// partition d and bit-identical across runs for a fixed seed.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "frsid/errors.hpp"
#include "frsid/hankel.hpp"
#include "frsid/io_counters.hpp"
#include "frsid/matops.hpp"
#include "frsid/rng.hpp"
#include "frsid/timeseries.hpp"
#include "frsid/types.hpp"

namespace frsid {

/// Configuration for one streaming compression pass.
struct SketchConfig {
  Index k = 0;           ///< block-Hankel horizon (rows per matrix = k*m or k*p)
  Index l = 5;           ///< oversampling; N_c = 2k(m+p) + l
  int q = 0;             ///< Gram-power exponent, 0 or 1
  Index d = 1;           ///< number of column blocks to stream
  std::uint64_t seed = 0;
  bool scale_columns = false;  ///< multiply Hankel entries by 1/sqrt(N)

  Index sketch_columns(Index m, Index p) const {
    return 2 * k * (m + p) + l;
  }

  void validate(Index m, Index p, Index n_columns) const {
    if (k < 1) throw ConfigError("sketch: k must be positive");
    if (l < 1) throw ConfigError("sketch: l must be positive");
    if (q != 0 && q != 1) throw ConfigError("sketch: q must be 0 or 1");
    if (d < 1 || d > n_columns)
      throw ConfigError("sketch: d must satisfy 1 <= d <= N");
    if (sketch_columns(m, p) > n_columns)
      throw ConfigError("sketch: N_c = " +
                        std::to_string(sketch_columns(m, p)) +
                        " exceeds N = " + std::to_string(n_columns) +
                        "; compression must not expand");
  }
};

/// Deterministic source for rows of the Gaussian compression matrix C.
///
/// Row t (global column index t of the Hankel matrices) is an independent
/// stream derived from (seed, t); entries are i.i.d. N(0, 1/N_c).  Because
/// rows are addressed globally, any block partition sees the same C.
class GaussianSketchSource {
 public:
  GaussianSketchSource(std::uint64_t seed, Index n_c)
      : seed_(seed), n_c_(n_c), scale_(1.0 / std::sqrt(static_cast<double>(n_c))) {
    if (n_c < 1) throw ConfigError("sketch source: N_c must be positive");
  }

  Index columns() const { return n_c_; }

  /// Materializes rows [start, start + count) of C as a count x N_c block.
  Matrix rows(Index start, Index count) const {
    Matrix block(count, n_c_);
    for (Index r = 0; r < count; ++r) {
      GaussianStream stream(
          derive_seed(seed_, static_cast<std::uint64_t>(start + r)));
      for (Index c = 0; c < n_c_; ++c) block(r, c) = stream.next() * scale_;
    }
    return block;
  }

 private:
  std::uint64_t seed_ = 0;
  Index n_c_ = 0;
  double scale_ = 1.0;
};

/// The four compressed Hankel matrices plus the factors needed downstream.
struct SketchedData {
  Matrix u_past;    ///< k*m x N_c
  Matrix u_future;  ///< k*m x N_c
  Matrix y_past;    ///< k*p x N_c
  Matrix y_future;  ///< k*p x N_c
  Index n_columns = 0;  ///< N of the uncompressed matrices
  int q = 0;
  bool scaled = false;  ///< 1/sqrt(N) convention used

  Index n_c() const { return u_past.cols(); }

  /// Stacked compressed past data [u_past; y_past].
  Matrix w_past() const {
    Matrix w(u_past.rows() + y_past.rows(), n_c());
    w.topRows(u_past.rows()) = u_past;
    w.bottomRows(y_past.rows()) = y_past;
    return w;
  }

  /// Stacked compressed joint matrix [u_future; u_past; y_past; y_future].
  Matrix joint() const {
    Matrix h(2 * (u_past.rows() + y_past.rows()), n_c());
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

/// One-pass accumulator behind sketch_stream; checkpointable between blocks.
class SketchAccumulator {
 public:
  SketchAccumulator(const SketchConfig& cfg, Index m, Index p, Index n_columns)
      : cfg_(cfg), m_(m), p_(p), part_(n_columns, cfg.d),
        source_(cfg.seed, cfg.sketch_columns(m, p)) {
    cfg.validate(m, p, n_columns);
    const Index n_c = source_.columns();
    raw_u_past_ = Matrix::Zero(cfg.k * m, n_c);
    raw_u_future_ = Matrix::Zero(cfg.k * m, n_c);
    raw_y_past_ = Matrix::Zero(cfg.k * p, n_c);
    raw_y_future_ = Matrix::Zero(cfg.k * p, n_c);
    if (cfg.q == 1) {
      gram_u_past_ = Matrix::Zero(cfg.k * m, cfg.k * m);
      gram_u_future_ = Matrix::Zero(cfg.k * m, cfg.k * m);
      gram_y_past_ = Matrix::Zero(cfg.k * p, cfg.k * p);
      gram_y_future_ = Matrix::Zero(cfg.k * p, cfg.k * p);
    }
  }

  const BlockPartition& partition() const { return part_; }
  Index next_block() const { return next_block_; }
  bool done() const { return next_block_ == part_.d; }

  /// Absorbs the next pending block, reading it from @p ts.
  void absorb_next(const TimeSeriesData& ts, IoCounters* io = nullptr) {
    if (done()) throw ConfigError("sketch: all blocks already absorbed");
    const Index i = next_block_;
    const HankelSet block =
        hankel_block(ts, cfg_.k, part_, i, cfg_.scale_columns, io);
    const Matrix c_block = source_.rows(part_.start(i), part_.width(i));
    count_read(io, static_cast<std::uint64_t>(c_block.size()));

    raw_u_past_.noalias() += block.u_past * c_block;
    raw_u_future_.noalias() += block.u_future * c_block;
    raw_y_past_.noalias() += block.y_past * c_block;
    raw_y_future_.noalias() += block.y_future * c_block;
    if (cfg_.q == 1) {
      // Second logical pass over the block for the Gram accumulation.
      count_read(io, static_cast<std::uint64_t>(
                         2 * cfg_.k * (m_ + p_) * part_.width(i)));
      gram_u_past_.noalias() += block.u_past * block.u_past.transpose();
      gram_u_future_.noalias() += block.u_future * block.u_future.transpose();
      gram_y_past_.noalias() += block.y_past * block.y_past.transpose();
      gram_y_future_.noalias() += block.y_future * block.y_future.transpose();
    }
    ++next_block_;
  }

  /// Applies the Gram power and returns the compressed matrices.
  SketchedData finalize(IoCounters* io = nullptr) const {
    if (!done())
      throw ConfigError("sketch: finalize before all blocks absorbed (" +
                        std::to_string(next_block_) + " of " +
                        std::to_string(part_.d) + ")");
    SketchedData out;
    if (cfg_.q == 1) {
      out.u_past = gram_u_past_ * raw_u_past_;
      out.u_future = gram_u_future_ * raw_u_future_;
      out.y_past = gram_y_past_ * raw_y_past_;
      out.y_future = gram_y_future_ * raw_y_future_;
    } else {
      out.u_past = raw_u_past_;
      out.u_future = raw_u_future_;
      out.y_past = raw_y_past_;
      out.y_future = raw_y_future_;
    }
    out.n_columns = part_.n_columns;
    out.q = cfg_.q;
    out.scaled = cfg_.scale_columns;
    count_write(io, static_cast<std::uint64_t>(
                        out.u_past.size() + out.u_future.size() +
                        out.y_past.size() + out.y_future.size()));
    return out;
  }

  /// Serializes config + accumulators so a later process can resume.
  void save_checkpoint(const std::string& path) const;

  /// Restores an accumulator; throws ConfigError if @p cfg or the data
  /// dimensions do not match the checkpointed run.
  static SketchAccumulator load_checkpoint(const std::string& path,
                                           const SketchConfig& cfg, Index m,
                                           Index p, Index n_columns);

 private:
  SketchConfig cfg_;
  Index m_ = 0;
  Index p_ = 0;
  BlockPartition part_;
  GaussianSketchSource source_;
  Index next_block_ = 0;
  Matrix raw_u_past_, raw_u_future_, raw_y_past_, raw_y_future_;
  Matrix gram_u_past_, gram_u_future_, gram_y_past_, gram_y_future_;
};

namespace detail {

constexpr char kCheckpointMagic[6] = {'F', 'R', 'S', 'I', 'D', 'C'};

inline void write_matrix(std::ostream& out, const Matrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
}

inline void read_matrix(std::istream& in, Matrix& m, const std::string& what) {
  const std::streamsize bytes =
      static_cast<std::streamsize>(sizeof(double) * m.size());
  in.read(reinterpret_cast<char*>(m.data()), bytes);
  if (in.gcount() != bytes)
    throw ParseError("sketch checkpoint: truncated " + what);
}

}  // namespace detail

inline void SketchAccumulator::save_checkpoint(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ParseError("sketch checkpoint: cannot open for writing: " + path);
  out.write(detail::kCheckpointMagic, sizeof(detail::kCheckpointMagic));
  const std::uint64_t header[9] = {
      static_cast<std::uint64_t>(cfg_.k), static_cast<std::uint64_t>(cfg_.l),
      static_cast<std::uint64_t>(cfg_.q), static_cast<std::uint64_t>(cfg_.d),
      cfg_.seed, static_cast<std::uint64_t>(cfg_.scale_columns ? 1 : 0),
      static_cast<std::uint64_t>(m_), static_cast<std::uint64_t>(p_),
      static_cast<std::uint64_t>(part_.n_columns)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  const std::uint64_t next = static_cast<std::uint64_t>(next_block_);
  out.write(reinterpret_cast<const char*>(&next), sizeof(next));
  detail::write_matrix(out, raw_u_past_);
  detail::write_matrix(out, raw_u_future_);
  detail::write_matrix(out, raw_y_past_);
  detail::write_matrix(out, raw_y_future_);
  if (cfg_.q == 1) {
    detail::write_matrix(out, gram_u_past_);
    detail::write_matrix(out, gram_u_future_);
    detail::write_matrix(out, gram_y_past_);
    detail::write_matrix(out, gram_y_future_);
  }
  if (!out) throw ParseError("sketch checkpoint: write failed: " + path);
}

inline SketchAccumulator SketchAccumulator::load_checkpoint(
    const std::string& path, const SketchConfig& cfg, Index m, Index p,
    Index n_columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("sketch checkpoint: cannot open: " + path);
  char magic[6] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, detail::kCheckpointMagic, sizeof(magic)) != 0)
    throw ParseError("sketch checkpoint: bad magic (expected FRSIDC): " + path);
  std::uint64_t header[9] = {};
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw ParseError("sketch checkpoint: truncated header");
  const bool matches =
      header[0] == static_cast<std::uint64_t>(cfg.k) &&
      header[1] == static_cast<std::uint64_t>(cfg.l) &&
      header[2] == static_cast<std::uint64_t>(cfg.q) &&
      header[3] == static_cast<std::uint64_t>(cfg.d) && header[4] == cfg.seed &&
      header[5] == static_cast<std::uint64_t>(cfg.scale_columns ? 1 : 0) &&
      header[6] == static_cast<std::uint64_t>(m) &&
      header[7] == static_cast<std::uint64_t>(p) &&
      header[8] == static_cast<std::uint64_t>(n_columns);
  if (!matches)
    throw ConfigError(
        "sketch checkpoint: configuration does not match checkpointed run");

  SketchAccumulator acc(cfg, m, p, n_columns);
  std::uint64_t next = 0;
  in.read(reinterpret_cast<char*>(&next), sizeof(next));
  if (!in || next > static_cast<std::uint64_t>(acc.part_.d))
    throw ParseError("sketch checkpoint: bad block cursor");
  acc.next_block_ = static_cast<Index>(next);
  detail::read_matrix(in, acc.raw_u_past_, "u_past sketch");
  detail::read_matrix(in, acc.raw_u_future_, "u_future sketch");
  detail::read_matrix(in, acc.raw_y_past_, "y_past sketch");
  detail::read_matrix(in, acc.raw_y_future_, "y_future sketch");
  if (cfg.q == 1) {
    detail::read_matrix(in, acc.gram_u_past_, "u_past gram");
    detail::read_matrix(in, acc.gram_u_future_, "u_future gram");
    detail::read_matrix(in, acc.gram_y_past_, "y_past gram");
    detail::read_matrix(in, acc.gram_y_future_, "y_future gram");
  }
  return acc;
}

/// Streams all blocks of @p ts through a SketchAccumulator and finalizes.
inline SketchedData sketch_stream(const TimeSeriesData& ts,
                                  const SketchConfig& cfg,
                                  IoCounters* io = nullptr) {
  ts.validate();
  const Index n = hankel_columns(ts.n_samples(), cfg.k);
  SketchAccumulator acc(cfg, ts.m(), ts.p(), n);
  while (!acc.done()) acc.absorb_next(ts, io);
  return acc.finalize(io);
}

/// Compresses a generic matrix: (M M^T)^q * M * C with C = n_c Gaussian
/// columns drawn from (seed, row index of C).  Requires n_c < cols(M).
inline Matrix sketch_matrix(const Eigen::Ref<const Matrix>& m, Index n_c,
                            int q, std::uint64_t seed) {
  if (m.size() == 0) throw DimensionError("sketch_matrix: empty matrix");
  if (!is_finite(m)) throw InputError("sketch_matrix: non-finite input");
  if (q != 0 && q != 1) throw ConfigError("sketch_matrix: q must be 0 or 1");
  if (n_c < 1 || n_c >= m.cols())
    throw ConfigError("sketch_matrix: need 1 <= N_c < cols");
  const GaussianSketchSource source(seed, n_c);
  Matrix sketch = m * source.rows(0, m.cols());
  if (q == 1) sketch = (m * m.transpose()) * sketch;
  return sketch;
}

}  // namespace frsid
