#pragma once

// Fixed, self-contained random number generation.
//
// Every random quantity in the library is drawn from the generators below so
// that results are bit-identical across runs, platforms, and standard-library
// implementations (std::normal_distribution is implementation-defined and is
// therefore not used).  The scheme is:
//
//   * splitmix64        -- seed scrambling / substream derivation,
//   * xoshiro256**      -- the underlying uniform 64-bit generator,
//   * 256-layer ziggurat -- exact standard-normal variates at a few ns each
//     (the compression matrix alone needs ~1e8-1e9 variates at benchmark
//     scale, which rules out transcendental-per-sample methods).
//
// Substreams for independent objects are derived by hashing (seed, index)
// through splitmix64, so any object indexed by a stable integer (a Hankel
// column, a Monte-Carlo run, ...) has a reproducible stream of its own.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace frsid {

/// One splitmix64 step: advances @p state and returns the next scrambled word.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent substream seed from (seed, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  return splitmix64_next(s);
}

/// xoshiro256** uniform generator (Blackman & Vigna), seeded via splitmix64.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) {
    for (auto& word : state_) word = splitmix64_next(seed);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in (0, 1]; never returns 0 so log() below is safe.
  double next_unit() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

namespace detail {

/// Precomputed tables for a 256-layer ziggurat over exp(-x^2/2), x >= 0.
///
/// Layer 0 is the base strip (rectangle [0,r] x [0,f(r)] plus the analytic
/// tail, sampled through a virtual rectangle of width v/f(r)); layers
/// 1..255 are the equal-area strips [0, x_i] x [f(x_i), f(x_{i-1})], with
/// layer 1 capped at the density peak (f(x_0) := 1).
///
/// The tables are solved at first use rather than hard-coded: the rightmost
/// edge r is found by bisection so that the equal-area recurrence
///   f(x_{i-1}) = f(x_i) + v / x_i
/// started at x_255 = r closes exactly at the peak (f(x_1) + v/x_1 = 1).
/// This keeps every constant self-consistent in double precision instead of
/// trusting transcribed literals.
struct ZigguratTables {
  static constexpr int kLayers = 256;
  double edge[kLayers];          ///< right rectangle edge per layer
  double height[kLayers];        ///< strip top: f(x_{i-1}) is height[i-1]
  double accept_ratio[kLayers];  ///< quick-accept threshold on u in [0,1)
  double r = 0.0;                ///< rightmost edge (tail boundary)

  static const ZigguratTables& get() {
    static const ZigguratTables tables;
    return tables;
  }

 private:
  static double f(double x) { return std::exp(-0.5 * x * x); }

  /// Tail area of the unnormalized density: integral_r^inf exp(-t^2/2) dt.
  static double tail_area(double r) {
    return std::sqrt(std::numbers::pi / 2.0) * std::erfc(r / std::sqrt(2.0));
  }

  /// Runs the layer recurrence down from x_255 = r to x_1; returns the
  /// closure defect f(x_1) + v/x_1 - 1 (positive when r is too small) and
  /// fills @p x[1..255] when requested.
  static double closure_defect(double r, double* x) {
    const double v = r * f(r) + tail_area(r);
    double current = r;
    if (x != nullptr) x[kLayers - 1] = r;
    for (int i = kLayers - 2; i >= 1; --i) {
      const double arg = f(current) + v / current;
      if (arg >= 1.0) return 1e9;  // layer stack overshot the peak
      current = std::sqrt(-2.0 * std::log(arg));
      if (x != nullptr) x[i] = current;
    }
    return f(current) + v / current - 1.0;
  }

  ZigguratTables() {
    double lo = 3.0, hi = 4.0;
    if (!(closure_defect(lo, nullptr) > 0.0) ||
        !(closure_defect(hi, nullptr) < 0.0))
      throw std::logic_error("ziggurat: bisection bracket invalid");
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (closure_defect(mid, nullptr) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    r = 0.5 * (lo + hi);
    closure_defect(r, edge);
    const double v = r * f(r) + tail_area(r);
    for (int i = 1; i < kLayers; ++i) height[i] = f(edge[i]);
    height[0] = 1.0;  // strip 1 is capped at the peak
    edge[0] = v / f(r);  // virtual base width; beyond r lies the tail
    accept_ratio[0] = r / edge[0];
    accept_ratio[1] = 0.0;  // strip 1 touches x = 0, no quick-accept zone
    for (int i = 2; i < kLayers; ++i)
      accept_ratio[i] = edge[i - 1] / edge[i];
  }
};

}  // namespace detail

/// Stream of i.i.d. standard-normal variates (ziggurat on xoshiro256**).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed)
      : rng_(seed), tables_(detail::ZigguratTables::get()) {}

  double next() {
    for (;;) {
      const std::uint64_t word = rng_.next();
      const int layer = static_cast<int>(word & 0xff);
      const double sign = (word & 0x100) ? -1.0 : 1.0;
      // 53 uniform bits -> u in [0, 1).
      const double u = static_cast<double>(word >> 11) * 0x1.0p-53;
      const double candidate = u * tables_.edge[layer];
      if (u < tables_.accept_ratio[layer]) return sign * candidate;
      if (layer == 0) return sign * sample_tail();
      const double y_low = tables_.height[layer];
      const double y_high = tables_.height[layer - 1];
      const double y = y_low + rng_.next_unit() * (y_high - y_low);
      if (y < std::exp(-0.5 * candidate * candidate)) return sign * candidate;
      // Rejected inside the strip: redraw layer and candidate.
    }
  }

 private:
  /// Exact tail sample beyond r (Marsaglia's method).
  double sample_tail() {
    const double r = tables_.r;
    for (;;) {
      const double x = -std::log(rng_.next_unit()) / r;
      const double y = -std::log(rng_.next_unit());
      if (y + y >= x * x) return r + x;
    }
  }

  Xoshiro256 rng_;
  const detail::ZigguratTables& tables_;
};

}  // namespace frsid
