#include "mmfmd/field_ops.hpp"

#include <algorithm>
#include <cmath>

#include "mmfmd/error.hpp"
#include "mmfmd/rng.hpp"

namespace mmfmd {

RoiMask RoiMask::full(std::size_t side) {
  return RoiMask(Grid<std::uint8_t>(side, 1));
}

RoiMask RoiMask::circle(std::size_t side, double radius_px) {
  Grid<std::uint8_t> m(side, 0);
  const double c = 0.5 * static_cast<double>(side);
  for (std::size_t row = 0; row < side; ++row)
    for (std::size_t col = 0; col < side; ++col)
      if (std::hypot(row + 0.5 - c, col + 0.5 - c) <= radius_px) m(row, col) = 1;
  return RoiMask(std::move(m));
}

std::size_t RoiMask::count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> RoiMask::indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i]) idx.push_back(i);
  return idx;
}

ComplexField superpose(const DecompositionVector& coefficients, const ModeBasis& basis) {
  if (static_cast<std::size_t>(coefficients.size()) != basis.size())
    throw ValidationError("weight vector has " + std::to_string(coefficients.size()) +
                          " entries, basis has " + std::to_string(basis.size()) + " modes");
  ComplexField out{ComplexGrid(basis.grid_side()), basis.spec().pixel_pitch()};
  auto e = out.grid.values();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Complex c = coefficients(static_cast<Eigen::Index>(i));
    if (c == Complex{}) continue;
    const auto psi = basis.field(i).values();
    for (std::size_t k = 0; k < e.size(); ++k) e[k] += c * psi[k];
  }
  return out;
}

ComplexField superpose(const ModeWeights& weights, const ModeBasis& basis) {
  return superpose(weights.coefficients(), basis);
}

IntensityImage intensity(const ComplexField& field) {
  IntensityImage img{RealGrid(field.grid.side()), field.pixel_pitch};
  for (std::size_t k = 0; k < field.grid.size(); ++k) img.grid[k] = std::norm(field.grid[k]);
  return img;
}

IntensityImage amplitude(const ComplexField& field) {
  IntensityImage img{RealGrid(field.grid.side()), field.pixel_pitch};
  for (std::size_t k = 0; k < field.grid.size(); ++k) img.grid[k] = std::abs(field.grid[k]);
  return img;
}

double cross_correlation(const IntensityImage& target, const IntensityImage& other,
                         const RoiMask& roi) {
  if (target.grid.side() != other.grid.side() || roi.side() != target.grid.side())
    throw ValidationError("cross_correlation: image and ROI shapes differ");
  const auto idx = roi.indices();
  if (idx.size() < 2) throw ValidationError("ROI must select at least two pixels");

  double mean_t = 0.0, mean_o = 0.0;
  for (std::size_t k : idx) {
    mean_t += target.grid[k];
    mean_o += other.grid[k];
  }
  mean_t /= static_cast<double>(idx.size());
  mean_o /= static_cast<double>(idx.size());

  double cov = 0.0, var_t = 0.0, var_o = 0.0, sq_t = 0.0, sq_o = 0.0;
  for (std::size_t k : idx) {
    const double dt = target.grid[k] - mean_t;
    const double d_o = other.grid[k] - mean_o;
    cov += dt * d_o;
    var_t += dt * dt;
    var_o += d_o * d_o;
    sq_t += target.grid[k] * target.grid[k];
    sq_o += other.grid[k] * other.grid[k];
  }
  // Constant up to rounding counts as constant.
  if (!(var_t > 1e-24 * sq_t) || !(var_o > 1e-24 * sq_o))
    throw DegenerateCorrelationError("correlation undefined: image is constant over the ROI");
  return std::clamp(cov / std::sqrt(var_t * var_o), -1.0, 1.0);
}

double cross_correlation(const IntensityImage& target, const IntensityImage& other) {
  return cross_correlation(target, other, RoiMask::full(target.grid.side()));
}

namespace {

// Row k of the averaging operator: overlap of input pixel i with output
// footprint k, divided by the footprint width.
std::vector<std::vector<std::pair<std::size_t, double>>> area_weights(std::size_t n,
                                                                       std::size_t m) {
  const double ratio = static_cast<double>(n) / static_cast<double>(m);
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lo = k * ratio;
    const double hi = (k + 1) * ratio;
    const auto first = static_cast<std::size_t>(std::floor(lo));
    const auto last = std::min(n, static_cast<std::size_t>(std::ceil(hi)));
    for (std::size_t i = first; i < last; ++i) {
      const double overlap = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
      if (overlap > 0.0) rows[k].emplace_back(i, overlap / ratio);
    }
  }
  return rows;
}

}  // namespace

RealGrid downsample(const RealGrid& grid, std::size_t new_size) {
  const std::size_t n = grid.side();
  if (new_size < 2) throw ValidationError("downsample: new size must be >= 2");
  if (new_size > n) throw ValidationError("downsample: new size exceeds the current size");
  const auto w = area_weights(n, new_size);

  // Rows first, then columns.
  std::vector<double> tmp(new_size * n, 0.0);
  for (std::size_t k = 0; k < new_size; ++k)
    for (const auto& [i, wt] : w[k])
      for (std::size_t col = 0; col < n; ++col) tmp[k * n + col] += wt * grid(i, col);

  RealGrid out(new_size);
  for (std::size_t row = 0; row < new_size; ++row)
    for (std::size_t k = 0; k < new_size; ++k) {
      double acc = 0.0;
      for (const auto& [i, wt] : w[k]) acc += wt * tmp[row * n + i];
      out(row, k) = acc;
    }
  return out;
}

IntensityImage downsample(const IntensityImage& image, std::size_t new_size) {
  const double scale = static_cast<double>(image.grid.side()) / static_cast<double>(new_size);
  return {downsample(image.grid, new_size), image.pixel_pitch * scale};
}

IntensityImage add_camera_noise(const IntensityImage& image, const CameraNoise& noise,
                                std::uint64_t seed, std::uint64_t index) {
  if (noise.read_noise_sigma < 0.0) throw ValidationError("noise sigma must be >= 0");
  IntensityImage out = image;
  double peak = 0.0;
  for (double v : image.grid) peak = std::max(peak, v);

  if (noise.read_noise_sigma > 0.0) {
    const double sd = noise.read_noise_sigma * peak;
    // One counter block per pixel: stream index packs (index, pixel).
    for (std::size_t k = 0; k < out.grid.size(); ++k) {
      CounterRng rng(seed, Stream::camera_noise, (index << 32) ^ k);
      out.grid[k] = std::max(0.0, out.grid[k] + sd * rng.normal());
    }
  }
  if (noise.quantize_8bit && peak > 0.0) {
    for (double& v : out.grid) {
      const double level = std::clamp(std::round(v / peak * 255.0), 0.0, 255.0);
      v = level * peak / 255.0;
    }
  }
  return out;
}

}  // namespace mmfmd
