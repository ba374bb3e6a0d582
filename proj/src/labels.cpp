#include "mmfmd/labels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mmfmd/error.hpp"
#include "mmfmd/parallel.hpp"

namespace mmfmd {

SignPattern SignPattern::from_index(std::size_t index, std::size_t length) {
  SignPattern p;
  p.signs.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t bit = length - 1 - i;  // first sign is the most significant
    p.signs[i] = ((index >> bit) & 1u) ? -1 : +1;
  }
  return p;
}

ModeWeights canonicalize(const ModeWeights& weights) {
  if (weights.size() == 0) throw ValidationError("canonicalize: empty weight vector");
  const double power = weights.power();
  if (!(power > 0.0)) throw ValidationError("canonicalize: all amplitudes are zero");
  const double scale = 1.0 / std::sqrt(power);
  ModeWeights out = weights;
  const double ref = weights.phases[0];
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.amplitudes[i] < 0.0) throw ValidationError("canonicalize: negative amplitude");
    out.amplitudes[i] *= scale;
    out.phases[i] = i == 0 ? 0.0 : wrap_phase(weights.phases[i] - ref);
  }
  return out;
}

bool is_canonical(const ModeWeights& weights) {
  if (weights.size() == 0 || weights.phases[0] != 0.0) return false;
  if (std::abs(weights.power() - 1.0) > 1e-9) return false;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights.amplitudes[i] < 0.0) return false;
    if (weights.phases[i] < 0.0 || weights.phases[i] >= 2.0 * std::numbers::pi) return false;
  }
  return true;
}

LabelVector encode(const ModeWeights& weights) {
  if (!is_canonical(weights))
    throw ValidationError("encode: weights are not canonical (phi_0 = 0, unit power)");
  const std::size_t n = weights.size();
  LabelVector label;
  label.values.resize(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i) label.values[i] = std::min(1.0, weights.amplitudes[i]);
  for (std::size_t i = 1; i < n; ++i) {
    label.values[n + i - 1] = weights.amplitudes[i] < kZeroAmplitude
                                  ? 1.0
                                  : 0.5 * (std::cos(weights.phases[i]) + 1.0);
  }
  return label;
}

namespace {

struct DecodedParts {
  std::vector<double> amplitudes;  // unit power
  std::vector<double> angles;      // acos(psi_i), index 0 unused
};

DecodedParts split_label(const LabelVector& label) {
  if (label.values.empty() || label.values.size() % 2 == 0)
    throw ValidationError("label length must be 2N-1");
  const std::size_t n = label.modes();
  DecodedParts parts;
  parts.amplitudes.assign(label.values.begin(), label.values.begin() + static_cast<long>(n));
  double power = 0.0;
  for (double& a : parts.amplitudes) {
    a = std::max(0.0, a);
    power += a * a;
  }
  if (!(power > 0.0)) throw ValidationError("label has all-zero amplitudes");
  const double scale = 1.0 / std::sqrt(power);
  for (double& a : parts.amplitudes) a *= scale;

  parts.angles.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double psi = std::clamp(2.0 * label.values[n + i - 1] - 1.0, -1.0, 1.0);
    parts.angles[i] = std::acos(psi);
  }
  return parts;
}

}  // namespace

ModeWeights decode_with_signs(const LabelVector& label, const SignPattern& signs) {
  const auto parts = split_label(label);
  const std::size_t n = parts.amplitudes.size();
  if (signs.signs.size() != n - 1) throw ValidationError("sign pattern length must be N-1");
  ModeWeights w;
  w.amplitudes = parts.amplitudes;
  w.phases.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) w.phases[i] = wrap_phase(signs.signs[i - 1] * parts.angles[i]);
  return w;
}

SignSearchResult decode_with_sign_search(const LabelVector& label, const IntensityImage& target,
                                         const ModeBasis& basis, const RoiMask& roi) {
  const std::size_t n = basis.size();
  if (label.values.size() != 2 * n - 1)
    throw ValidationError("label length " + std::to_string(label.values.size()) +
                          " does not match 2N-1 = " + std::to_string(2 * n - 1));
  if (n > kMaxSignSearchModes)
    throw ValidationError("sign search supports at most 25 modes");
  if (target.grid.side() != basis.grid_side() || roi.side() != basis.grid_side())
    throw ValidationError("target image, ROI and basis grids differ");

  const auto roi_idx = roi.indices();
  const std::size_t m = roi_idx.size();
  if (m < 2) throw ValidationError("ROI must select at least two pixels");

  // Centered target over the ROI.
  std::vector<double> tc(m);
  double mean_t = 0.0, sq_t = 0.0;
  for (std::size_t k = 0; k < m; ++k) mean_t += target.grid[roi_idx[k]];
  mean_t /= static_cast<double>(m);
  double var_t = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double t = target.grid[roi_idx[k]];
    tc[k] = t - mean_t;
    var_t += tc[k] * tc[k];
    sq_t += t * t;
  }
  if (!(var_t > 1e-24 * sq_t))
    throw DegenerateCorrelationError("target image is constant over the ROI");

  const auto parts = split_label(label);

  // The real part of every candidate field is the same; only the imaginary
  // part changes sign per mode. re = sum rho cos(theta) psi,
  // im = sum s_i rho sin(theta) psi.
  std::vector<double> re(m, 0.0);
  std::vector<std::vector<double>> im_terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex c = std::polar(parts.amplitudes[i], parts.angles[i]);
    const auto psi = basis.field(i).values();
    im_terms[i].resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      re[k] += c.real() * psi[roi_idx[k]];
      im_terms[i][k] = c.imag() * psi[roi_idx[k]];
    }
  }

  const std::size_t n_patterns = std::size_t{1} << (n - 1);
  std::vector<double> gammas(n_patterns);
  constexpr std::size_t kBlock = 32;
  const std::size_t n_blocks = (n_patterns + kBlock - 1) / kBlock;

  parallel_for(0, n_blocks, [&](std::size_t block) {
    std::vector<double> im(m), io(m);
    const std::size_t end = std::min(n_patterns, (block + 1) * kBlock);
    for (std::size_t p = block * kBlock; p < end; ++p) {
      std::fill(im.begin(), im.end(), 0.0);
      for (std::size_t i = 1; i < n; ++i) {
        const bool negative = (p >> (n - 1 - i)) & 1u;
        const auto& term = im_terms[i];
        if (negative)
          for (std::size_t k = 0; k < m; ++k) im[k] -= term[k];
        else
          for (std::size_t k = 0; k < m; ++k) im[k] += term[k];
      }
      double mean_o = 0.0, sq_o = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        io[k] = re[k] * re[k] + im[k] * im[k];
        mean_o += io[k];
        sq_o += io[k] * io[k];
      }
      mean_o /= static_cast<double>(m);
      double cov = 0.0, var_o = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double d = io[k] - mean_o;
        cov += tc[k] * d;
        var_o += d * d;
      }
      gammas[p] = var_o > 1e-24 * sq_o ? std::clamp(cov / std::sqrt(var_t * var_o), -1.0, 1.0)
                                       : -std::numeric_limits<double>::infinity();
    }
  });

  std::size_t best = 0;
  for (std::size_t p = 1; p < n_patterns; ++p)
    if (gammas[p] > gammas[best]) best = p;

  SignSearchResult result;
  result.signs = SignPattern::from_index(best, n - 1);
  result.weights = decode_with_signs(label, result.signs);
  result.gamma = gammas[best];
  result.candidates = n_patterns;
  return result;
}

}  // namespace mmfmd
