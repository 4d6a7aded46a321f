#pragma once

#include <cstdint>

namespace frsid {

/// Slow-memory traffic accounting at 8-byte-word granularity.
///
/// Counters are owned by the run that created them (passed by pointer, never
/// global), so concurrent runs do not share state.  A null pointer disables
/// accounting at zero cost.
struct IoCounters {
  std::uint64_t words_read = 0;     ///< 8-byte words consumed by kernels
  std::uint64_t words_written = 0;  ///< 8-byte words produced by kernels
  std::uint64_t blocks_read = 0;    ///< number of block messages consumed

  void add_read(std::uint64_t words) { words_read += words; }
  void add_write(std::uint64_t words) { words_written += words; }
  void add_block() { ++blocks_read; }

  std::uint64_t total_words() const { return words_read + words_written; }
};

inline void count_read(IoCounters* io, std::uint64_t words) {
  if (io != nullptr) io->add_read(words);
}

inline void count_write(IoCounters* io, std::uint64_t words) {
  if (io != nullptr) io->add_write(words);
}

inline void count_block(IoCounters* io) {
  if (io != nullptr) io->add_block();
}

}  // namespace frsid
