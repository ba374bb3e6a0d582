#pragma once

#include <cstddef>
#include <vector>

#include "mmfmd/field_ops.hpp"
#include "mmfmd/fiber_modes.hpp"
#include "mmfmd/mode_weights.hpp"

namespace mmfmd {

// N amplitudes followed by N-1 encoded phases (cos(phi_i) + 1) / 2, i >= 1.
struct LabelVector {
  std::vector<double> values;

  std::size_t modes() const noexcept { return (values.size() + 1) / 2; }
};

// arccos branch per higher-order mode: +1 or -1, mode 1 first.
struct SignPattern {
  std::vector<int> signs;

  // Pattern number `index` in lexicographic order with + before -.
  static SignPattern from_index(std::size_t index, std::size_t length);
  bool operator==(const SignPattern&) const = default;
};

// Below this amplitude a phase carries no information and is stored as 0.
inline constexpr double kZeroAmplitude = 1e-6;
// Sign search enumerates 2^(N-1) patterns; keep that bounded.
inline constexpr std::size_t kMaxSignSearchModes = 25;

// Rotates phases so phi_0 = 0, wraps to [0, 2*pi), renormalizes to unit power.
ModeWeights canonicalize(const ModeWeights& weights);
bool is_canonical(const ModeWeights& weights);

LabelVector encode(const ModeWeights& weights);

// Weights implied by a label and one branch choice (phases s_i * acos(psi_i)).
// Amplitudes are renormalized; phase entries are rescaled from [0, 1] to
// [-1, 1] and clamped.
ModeWeights decode_with_signs(const LabelVector& label, const SignPattern& signs);

struct SignSearchResult {
  ModeWeights weights;
  SignPattern signs;
  double gamma = 0.0;
  std::size_t candidates = 0;
};

// Tries every sign pattern and keeps the one whose synthesized intensity
// correlates best with `target` over `roi`. Ties go to the lowest pattern
// index, whatever the thread count.
SignSearchResult decode_with_sign_search(const LabelVector& label, const IntensityImage& target,
                                         const ModeBasis& basis, const RoiMask& roi);

}  // namespace mmfmd
