#pragma once

#include <array>
#include <cstdint>

namespace mmfmd {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3"). Stateless: the same (counter, key) always yields the
// same four words, which is what makes per-record randomness independent of
// the parallel schedule.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

// Independent purposes draw from disjoint streams of the same seed.
enum class Stream : std::uint32_t {
  prmc_weights = 1,
  camera_noise = 2,
  channel_matrix = 3,
  channel_noise = 4,
  gs_restart = 5,
  split_permutation = 6,
  trial_weights = 7,
  channel_loss = 8,
};

// Counter-based generator addressed by (seed, stream, index). Two generators
// with the same address produce identical sequences.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t index);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Standard normal (Box-Muller).
  double normal();

private:
  void refill();

  PhiloxKey key_{};
  PhiloxCounter ctr_{};
  PhiloxCounter block_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mmfmd
