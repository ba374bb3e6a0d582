#include "mmfmd/holography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fft.hpp"
#include "mmfmd/error.hpp"

namespace mmfmd {
namespace {

constexpr double kEnergyFraction = 0.999;
// The sideband's 99.9 % radius must stay inside this fraction of the filter.
constexpr double kFilterFill = 0.9;

double periodic(double f) { return f - std::round(f); }

// Radius around `center` enclosing kEnergyFraction of the energy in `spectrum`
// restricted to bins within `limit` of center (all bins if limit <= 0).
double energy_radius(const std::vector<Complex>& spectrum, std::size_t side, double cx, double cy,
                     double limit) {
  std::vector<std::pair<double, double>> bins;  // (radius, energy)
  double total = 0.0;
  for (std::size_t row = 0; row < side; ++row) {
    const double fy = periodic(detail::bin_frequency(row, side) - cy);
    for (std::size_t col = 0; col < side; ++col) {
      const double fx = periodic(detail::bin_frequency(col, side) - cx);
      const double r = std::hypot(fx, fy);
      if (limit > 0.0 && r > limit) continue;
      const double e = std::norm(spectrum[row * side + col]);
      bins.emplace_back(r, e);
      total += e;
    }
  }
  if (!(total > 0.0)) return 0.0;
  std::sort(bins.begin(), bins.end());
  double acc = 0.0;
  for (const auto& [r, e] : bins) {
    acc += e;
    if (acc >= kEnergyFraction * total) return r;
  }
  return bins.back().first;
}

void validate_carrier(const Carrier& c) {
  const double mag = c.magnitude();
  if (!(mag > 0.0 && mag < 0.5))
    throw ValidationError("carrier magnitude must lie in (0, 0.5) cycles/pixel");
  if (std::abs(c.fx) >= 0.5 || std::abs(c.fy) >= 0.5)
    throw ValidationError("carrier component beyond the sampling limit");
}

struct Sideband {
  std::vector<Complex> spectrum;  // filtered, full grid
  double energy = 0.0;            // sum |S|^2 over the filter
  double total = 0.0;             // sum |S|^2 over the whole spectrum
};

Sideband select_sideband(const Hologram& holo) {
  validate_carrier(holo.carrier);
  const std::size_t n = holo.grid.side();
  Sideband sb;
  sb.spectrum.assign(holo.grid.begin(), holo.grid.end());
  detail::fft2d(sb.spectrum, n, false);

  // E R* sits at minus the carrier frequency.
  const double cx = -holo.carrier.fx;
  const double cy = -holo.carrier.fy;
  const double radius = 0.5 * holo.carrier.magnitude();
  for (std::size_t row = 0; row < n; ++row) {
    const double fy = periodic(detail::bin_frequency(row, n) - cy);
    for (std::size_t col = 0; col < n; ++col) {
      const double fx = periodic(detail::bin_frequency(col, n) - cx);
      auto& s = sb.spectrum[row * n + col];
      const double e = std::norm(s);
      sb.total += e;
      if (std::hypot(fx, fy) <= radius)
        sb.energy += e;
      else
        s = Complex{};
    }
  }
  return sb;
}

}  // namespace

double Carrier::magnitude() const { return std::hypot(fx, fy); }

Carrier Carrier::diagonal(double magnitude) {
  const double c = magnitude / std::numbers::sqrt2;
  return {c, c};
}

DecompositionVector holographic_decompose(const ComplexField& field, const ModeBasis& basis) {
  if (field.grid.side() != basis.grid_side())
    throw ValidationError("field grid " + std::to_string(field.grid.side()) +
                          " does not match basis grid " + std::to_string(basis.grid_side()));
  DecompositionVector c(static_cast<Eigen::Index>(basis.size()));
  const auto e = field.grid.values();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto psi = basis.field(i).values();
    Complex acc{};
    for (std::size_t k = 0; k < e.size(); ++k) acc += psi[k] * e[k];
    c(static_cast<Eigen::Index>(i)) = acc * basis.pixel_area();
  }
  return c;
}

double object_bandwidth(const ComplexField& field) {
  std::vector<Complex> spec(field.grid.begin(), field.grid.end());
  detail::fft2d(spec, field.grid.side(), false);
  return energy_radius(spec, field.grid.side(), 0.0, 0.0, 0.0);
}

Hologram record_hologram(const ComplexField& object, Carrier carrier, double reference_amplitude) {
  validate_carrier(carrier);
  if (!(reference_amplitude > 0.0)) throw ValidationError("reference amplitude must be > 0");
  const double bandwidth = object_bandwidth(object);
  if (bandwidth > kFilterFill * 0.5 * carrier.magnitude())
    throw ReconstructionError("carrier too small: object bandwidth " + std::to_string(bandwidth) +
                              " cycles/pixel overlaps the sideband filter");

  const std::size_t n = object.grid.side();
  Hologram holo{RealGrid(n), carrier, reference_amplitude, object.pixel_pitch};
  for (std::size_t row = 0; row < n; ++row)
    for (std::size_t col = 0; col < n; ++col) {
      const double arg = 2.0 * std::numbers::pi * (carrier.fx * col + carrier.fy * row);
      const Complex ref = std::polar(reference_amplitude, arg);
      holo.grid(row, col) = std::norm(object.grid(row, col) + ref);
    }
  return holo;
}

ComplexField angular_spectrum_reconstruct(const Hologram& holo) {
  const std::size_t n = holo.grid.side();
  auto sb = select_sideband(holo);

  // An (almost) empty sideband means no object light; nothing to check.
  if (sb.energy > 1e-20 * sb.total) {
    const double radius = 0.5 * holo.carrier.magnitude();
    const double occupied =
        energy_radius(sb.spectrum, n, -holo.carrier.fx, -holo.carrier.fy, radius);
    if (occupied > kFilterFill * radius)
      throw ReconstructionError("sideband overlap: estimated object bandwidth " +
                                std::to_string(occupied) + " cycles/pixel fills the filter of " +
                                std::to_string(radius));
  }

  detail::fft2d(sb.spectrum, n, true);
  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  ComplexField out{ComplexGrid(n), holo.pixel_pitch};
  for (std::size_t row = 0; row < n; ++row)
    for (std::size_t col = 0; col < n; ++col) {
      const double arg = 2.0 * std::numbers::pi * (holo.carrier.fx * col + holo.carrier.fy * row);
      out.grid(row, col) = sb.spectrum[row * n + col] * norm * std::polar(1.0, arg) /
                           holo.reference_amplitude;
    }
  return out;
}

double sideband_energy(const Hologram& holo) {
  const auto sb = select_sideband(holo);
  const auto n = static_cast<double>(holo.grid.side());
  return sb.energy / (n * n);
}

}  // namespace mmfmd
