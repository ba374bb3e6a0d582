#pragma once

#include <cstdint>
#include <span>

#include "mmfmd/fiber_modes.hpp"
#include "mmfmd/grid.hpp"
#include "mmfmd/mode_weights.hpp"

namespace mmfmd {

struct ComplexField {
  ComplexGrid grid;
  double pixel_pitch = 1.0;
};

// Non-negative image. Also used for amplitude (sqrt intensity) images.
struct IntensityImage {
  RealGrid grid;
  double pixel_pitch = 1.0;
};

// Pixels entering the correlation coefficient.
class RoiMask {
public:
  RoiMask() = default;
  static RoiMask full(std::size_t side);
  // Pixel centers within `radius_px` of the grid center.
  static RoiMask circle(std::size_t side, double radius_px);

  std::size_t side() const noexcept { return mask_.side(); }
  bool operator()(std::size_t row, std::size_t col) const { return mask_(row, col) != 0; }
  bool selected(std::size_t index) const { return mask_[index] != 0; }
  std::size_t count() const;
  std::vector<std::size_t> indices() const;

private:
  explicit RoiMask(Grid<std::uint8_t> mask) : mask_(std::move(mask)) {}
  Grid<std::uint8_t> mask_;
};

ComplexField superpose(const ModeWeights& weights, const ModeBasis& basis);
ComplexField superpose(const DecompositionVector& coefficients, const ModeBasis& basis);

IntensityImage intensity(const ComplexField& field);
IntensityImage amplitude(const ComplexField& field);

// Pearson coefficient over the ROI. Throws DegenerateCorrelationError when
// either image is constant there.
double cross_correlation(const IntensityImage& target, const IntensityImage& other,
                         const RoiMask& roi);
double cross_correlation(const IntensityImage& target, const IntensityImage& other);

// Area-weighted averaging onto a coarser grid; integrated intensity is kept.
RealGrid downsample(const RealGrid& grid, std::size_t new_size);
IntensityImage downsample(const IntensityImage& image, std::size_t new_size);

struct CameraNoise {
  double read_noise_sigma = 0.0;  // fraction of the clean peak
  bool quantize_8bit = false;
};

// Gaussian read noise, clamped at zero, optionally quantized to 256 levels
// of the clean peak. Pixel k draws from the counter address (seed, index, k),
// so the result does not depend on evaluation order.
IntensityImage add_camera_noise(const IntensityImage& image, const CameraNoise& noise,
                                std::uint64_t seed, std::uint64_t index = 0);

}  // namespace mmfmd
