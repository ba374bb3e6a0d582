#include "mmfmd/intensity_md.hpp"

#include <cmath>
#include <numbers>

#include "mmfmd/error.hpp"
#include "mmfmd/holography.hpp"
#include "mmfmd/labels.hpp"
#include "mmfmd/parallel.hpp"
#include "mmfmd/rng.hpp"

namespace mmfmd {

void GsConfig::validate() const {
  if (max_iters < 1) throw ValidationError("gs: max_iters must be >= 1");
  if (restarts < 1) throw ValidationError("gs: restarts must be >= 1");
  if (!(tol > 0.0)) throw ValidationError("gs: tol must be > 0");
}

namespace {

struct RestartOutcome {
  DecompositionVector coefficients;
  double gamma = -2.0;
  std::vector<double> trace;
};

RestartOutcome run_restart(const IntensityImage& amp, const IntensityImage& measured_intensity,
                           const ModeBasis& basis, const GsConfig& cfg, std::uint64_t address) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  CounterRng rng(cfg.seed, Stream::gs_restart, address);
  DecompositionVector c(n);
  const double rho = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) c(i) = std::polar(rho, rng.uniform(0.0, 2.0 * std::numbers::pi));

  auto field = superpose(c, basis);
  RestartOutcome out;
  double gamma = cross_correlation(measured_intensity, intensity(field));
  out.trace.push_back(gamma);

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // Modulus constraint: measured amplitude, current phase.
    for (std::size_t k = 0; k < field.grid.size(); ++k) {
      const double mag = std::abs(field.grid[k]);
      field.grid[k] = mag > 0.0 ? field.grid[k] * (amp.grid[k] / mag) : Complex{amp.grid[k], 0.0};
    }
    // Mode-span constraint.
    c = holographic_decompose(field, basis);
    field = superpose(c, basis);

    const double next = cross_correlation(measured_intensity, intensity(field));
    out.trace.push_back(next);
    const double delta = std::abs(next - gamma);
    gamma = next;
    if (delta < cfg.tol) break;
  }
  out.coefficients = c;
  out.gamma = gamma;
  return out;
}

}  // namespace

GsResult gs_decompose(const IntensityImage& measured_amplitude, const ModeBasis& basis,
                      const GsConfig& cfg, std::uint64_t trial) {
  cfg.validate();
  if (measured_amplitude.grid.side() != basis.grid_side())
    throw ValidationError("gs: amplitude grid does not match the basis grid");
  double peak = 0.0;
  for (double a : measured_amplitude.grid) {
    if (a < 0.0) throw ValidationError("gs: amplitude must be non-negative");
    peak = std::max(peak, a);
  }
  if (!(peak > 0.0)) throw ValidationError("gs: measured amplitude is zero");

  IntensityImage measured_intensity = measured_amplitude;
  for (double& v : measured_intensity.grid) v *= v;

  const auto restarts = static_cast<std::size_t>(cfg.restarts);
  std::vector<RestartOutcome> outcomes(restarts);
  parallel_for(0, restarts, [&](std::size_t r) {
    outcomes[r] = run_restart(measured_amplitude, measured_intensity, basis, cfg,
                              (trial << 20) + r);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r)
    if (outcomes[r].gamma > outcomes[best].gamma) best = r;

  GsResult result;
  result.weights = canonicalize(ModeWeights::from_coefficients(outcomes[best].coefficients));
  result.gamma = outcomes[best].gamma;
  result.best_restart = best;
  for (auto& o : outcomes) result.traces.push_back(std::move(o.trace));
  return result;
}

}  // namespace mmfmd
