#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mmfmd {

using Complex = std::complex<double>;

// Square, row-major sample grid. Row index grows downward (camera order).
template <typename T>
class Grid {
public:
  Grid() = default;
  explicit Grid(std::size_t side, T fill = T{}) : side_(side), values_(side * side, fill) {}

  std::size_t side() const noexcept { return side_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T& operator()(std::size_t row, std::size_t col) { return values_[row * side_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const {
    return values_[row * side_ + col];
  }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool operator==(const Grid&) const = default;

private:
  std::size_t side_ = 0;
  std::vector<T> values_;
};

using RealGrid = Grid<double>;
using ComplexGrid = Grid<Complex>;

}  // namespace mmfmd
