#include "mmfmd/mode_weights.hpp"

#include <cmath>
#include <numbers>

#include "mmfmd/error.hpp"

namespace mmfmd {

double wrap_phase(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(phi, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

ModeWeights::ModeWeights(std::vector<double> rho, std::vector<double> phi)
    : amplitudes(std::move(rho)), phases(std::move(phi)) {
  if (amplitudes.size() != phases.size())
    throw ValidationError("amplitude and phase vectors differ in length");
}

Complex ModeWeights::coefficient(std::size_t i) const {
  return std::polar(amplitudes.at(i), phases.at(i));
}

Eigen::VectorXcd ModeWeights::coefficients() const {
  Eigen::VectorXcd c(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) c(static_cast<Eigen::Index>(i)) = coefficient(i);
  return c;
}

ModeWeights ModeWeights::from_coefficients(const Eigen::VectorXcd& c) {
  ModeWeights w;
  w.amplitudes.resize(static_cast<std::size_t>(c.size()));
  w.phases.resize(static_cast<std::size_t>(c.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    w.amplitudes[static_cast<std::size_t>(i)] = std::abs(c(i));
    w.phases[static_cast<std::size_t>(i)] = wrap_phase(std::arg(c(i)));
  }
  return w;
}

ModeWeights ModeWeights::conjugated() const {
  ModeWeights w = *this;
  for (double& p : w.phases) p = wrap_phase(-p);
  return w;
}

double ModeWeights::power() const {
  double p = 0.0;
  for (double a : amplitudes) p += a * a;
  return p;
}

}  // namespace mmfmd
