#pragma once

#include <array>
#include <cstdint>

namespace rci {

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Counter-based stream keyed by (seed, chain_id). Block `step` of the stream
/// is philox4x32((step lo, step hi, chain lo, chain hi), (seed lo, seed hi)),
/// so any chain can be replayed or resumed from a block index alone.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t chain_id, std::uint64_t step = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n), n > 0, by rejection.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t step() const { return step_; }
  void seek(std::uint64_t step);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t chain_;
  std::uint64_t step_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
};

/// Derives an independent 64-bit seed from a base seed and a label
/// (splitmix64 finalizer over the pair).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t label);

}  // namespace rci
