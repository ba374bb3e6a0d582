#pragma once

#include <cstdint>
#include <vector>

#include "mmfmd/field_ops.hpp"
#include "mmfmd/fiber_modes.hpp"
#include "mmfmd/mode_weights.hpp"

namespace mmfmd {

struct GsConfig {
  int max_iters = 500;
  int restarts = 16;
  double tol = 1e-10;  // stop when |delta gamma| falls below
  std::uint64_t seed = 0;

  void validate() const;
};

struct GsResult {
  ModeWeights weights;  // canonical
  double gamma = 0.0;   // reconstructed vs measured intensity
  std::size_t best_restart = 0;
  // Gamma after initialization and after every iteration, per restart.
  std::vector<std::vector<double>> traces;
};

// Gerchberg-Saxton style alternating projection between the measured modulus
// and the span of the mode basis. `trial` separates the random starts of
// independent calls sharing one seed.
GsResult gs_decompose(const IntensityImage& measured_amplitude, const ModeBasis& basis,
                      const GsConfig& cfg, std::uint64_t trial = 0);

}  // namespace mmfmd
