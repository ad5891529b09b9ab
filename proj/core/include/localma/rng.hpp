#pragma once

#include <array>
#include <cstdint>

namespace localma {

/// SplitMix64 finalizer applied to a combination of two words. Used to derive
/// independent seeds, e.g. per-replication seeds from (master_seed, rep_index).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

// Counter-based generator. The 128-bit Philox counter is split into a 64-bit
// stream id (high half) and a 64-bit block index (low half), so split() yields
// non-overlapping substreams under the same key with no shared state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  /// Generator for substream `id`, derived from this generator's key and stream.
  CounterRng split(std::uint64_t id) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Unbiased integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

/// Box-Muller normal sampler. Draws come in pairs; the second of each pair is
/// cached and returned on the next call.
class NormalSampler {
 public:
  double operator()(CounterRng& rng) noexcept;

 private:
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// One N(0, 1) draw from `rng` (uses the first value of a fresh Box-Muller pair).
double standard_normal(CounterRng& rng) noexcept;

}  // namespace localma
