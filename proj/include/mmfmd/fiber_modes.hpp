#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmfmd/grid.hpp"

namespace mmfmd {

// Step-index fiber geometry plus the square camera window it is sampled on.
// Lengths are in meters.
struct FiberSpec {
  double core_radius = 5e-6;
  double na = 0.1;
  double wavelength = 532e-9;
  int grid_size = 64;
  double window_side = 30e-6;

  // Window of `factor` core diameters (3 by default).
  static FiberSpec from_diameter(double core_diameter, double na, double wavelength,
                                 int grid_size, double window_factor = 3.0);

  double pixel_pitch() const { return window_side / grid_size; }
  double pixel_area() const { return pixel_pitch() * pixel_pitch(); }

  // Throws ValidationError when an invariant is violated.
  void validate() const;
};

// The two fibers of the optical bench.
FiberSpec fiber10_spec(int grid_size = 64);
FiberSpec fiber55_spec(int grid_size = 64);

enum class Parity { even, odd };

struct LpMode {
  int l = 0;
  int m = 1;
  Parity parity = Parity::even;
  double u = 0.0;
  double w = 0.0;

  // "LP01", "LP11e", "LP21o", ...
  std::string label() const;
};

// Parses labels such as "LP02", "LP11o", "LP21,e". l == 0 labels carry no parity.
struct ModeLabel {
  int l = 0;
  int m = 1;
  Parity parity = Parity::even;

  static ModeLabel parse(const std::string& text);
  std::string str() const;
  bool operator==(const ModeLabel&) const = default;
};

double v_number(const FiberSpec& spec);

// u*J_{l+1}(u)/J_l(u) - w*K_{l+1}(w)/K_l(w), w = sqrt(V^2 - u^2).
double characteristic_residual(int l, double u, double v);

// Guided LP modes, both orientations for l > 0, in canonical order
// (ascending u, then l, even before odd).
std::vector<LpMode> solve_lp_modes(const FiberSpec& spec);

// Unnormalized field: J_l(u r/a)/J_l(u) inside the core, K_l(w r/a)/K_l(w)
// outside, times cos(l theta) or sin(l theta). Pixel centers, origin at the
// window center, y grows downward.
RealGrid sample_mode_field(const FiberSpec& spec, const LpMode& mode);

// Immutable orthonormal basis of sampled mode fields. Inner products are
// sums over pixels times pixel area.
class ModeBasis {
public:
  ModeBasis(FiberSpec spec, std::vector<LpMode> modes, std::vector<RealGrid> fields,
            double raw_orthogonality_error);

  const FiberSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return modes_.size(); }
  std::size_t grid_side() const noexcept { return static_cast<std::size_t>(spec_.grid_size); }
  double pixel_area() const noexcept { return spec_.pixel_area(); }

  const LpMode& mode(std::size_t i) const { return modes_.at(i); }
  const std::vector<LpMode>& modes() const noexcept { return modes_; }
  const RealGrid& field(std::size_t i) const { return fields_.at(i); }

  // Largest |<psi_i, psi_j>| (i != j) of the sampled fields before
  // orthonormalization; a measure of grid adequacy.
  double raw_orthogonality_error() const noexcept { return raw_error_; }

  std::optional<std::size_t> find(const ModeLabel& label) const;

  // First `n` modes of this basis (e.g. a 3-mode subset of the 10-mode fiber).
  ModeBasis truncated(std::size_t n) const;

private:
  FiberSpec spec_;
  std::vector<LpMode> modes_;
  std::vector<RealGrid> fields_;
  double raw_error_ = 0.0;
};

// Tolerances applied by build_basis.
inline constexpr double kOrthogonalityTolerance = 1e-6;
inline constexpr double kRawOrthogonalityLimit = 0.05;

ModeBasis build_basis(const FiberSpec& spec);

Eigen::MatrixXd gram_matrix(const ModeBasis& basis);
double max_offdiagonal(const Eigen::MatrixXd& gram);

}  // namespace mmfmd
