#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmfmd/field_ops.hpp"
#include "mmfmd/fiber_modes.hpp"
#include "mmfmd/labels.hpp"
#include "mmfmd/mode_weights.hpp"

namespace mmfmd {

using ComplexMatrix = Eigen::MatrixXcd;

// Fiber channel expressed in a mode basis: output weights = T * input weights.
struct TransmissionMatrix {
  ComplexMatrix entries;
  std::string basis_id;

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries.rows()); }
};

struct ChannelModel {
  TransmissionMatrix t_true;
  double measurement_noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

// Short identifier of the basis a matrix is expressed in.
std::string basis_id(const ModeBasis& basis);

// Seeded random unitary (QR of a complex Gaussian matrix with the R diagonal
// made real-positive). `max_loss` > 0 scales column i by a seeded factor in
// [1 - max_loss, 1] (per-mode loss, no longer unitary).
ChannelModel random_channel(std::size_t modes, std::uint64_t seed, double sigma = 0.0,
                            double max_loss = 0.0, std::string id = {});

// y = T x + n, with n complex Gaussian of expected norm sigma * |x|, drawn
// from counter address (seed, draw).
DecompositionVector propagate(const ChannelModel& ch, const DecompositionVector& x,
                              std::uint64_t draw);

using Decomposer = std::function<DecompositionVector(const ComplexField&)>;

Decomposer holographic_decomposer(const ModeBasis& basis);

struct Measurement {
  TransmissionMatrix t;
  std::size_t propagations = 0;
};

// Sequential excitation: column j is the decomposition of the output field
// for input excitation j (the unit vector e_j, or column j of `excitations`).
// `round` selects fresh noise draws for repeated measurements.
Measurement measure_T(const ChannelModel& ch, const ModeBasis& basis, const Decomposer& decomposer,
                      const std::optional<ComplexMatrix>& excitations = std::nullopt,
                      std::uint64_t round = 0);

inline constexpr double kMaxConditionNumber = 1e6;

double condition_number(const ComplexMatrix& m);

// P = T^-1 with unit-norm columns. Throws ConditioningError above 1e6.
ComplexMatrix inverse_precode(const TransmissionMatrix& t_measured);

// sum |T_ii|^2 / sum |T_ij|^2.
double diag_fraction(const ComplexMatrix& t);

struct Detection {
  std::size_t index = 0;           // argmax in the target basis
  std::vector<double> amplitudes;  // |c_i| of the least-squares fit
};

// Fits the source fiber's `label` mode field (sampled on the same pixel grid)
// onto the target basis by least squares on the grid Gram matrix.
Detection detect_known_modes(const ModeLabel& label, const ModeBasis& source,
                             const ModeBasis& target);

}  // namespace mmfmd
