#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mmfmd/grid.hpp"

namespace mmfmd {

// Complex mode coefficients rho_i * exp(j phi_i).
struct ModeWeights {
  std::vector<double> amplitudes;
  std::vector<double> phases;

  ModeWeights() = default;
  ModeWeights(std::vector<double> rho, std::vector<double> phi);

  std::size_t size() const noexcept { return amplitudes.size(); }
  Complex coefficient(std::size_t i) const;
  Eigen::VectorXcd coefficients() const;

  // Phases wrapped to [0, 2*pi).
  static ModeWeights from_coefficients(const Eigen::VectorXcd& c);
  ModeWeights conjugated() const;
  double power() const;
};

// Output of a complex (holographic) decomposition: one coefficient per mode.
using DecompositionVector = Eigen::VectorXcd;

double wrap_phase(double phi);

}  // namespace mmfmd
