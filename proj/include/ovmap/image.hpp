#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ovmap {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  auto operator<=>(const Rgb&) const = default;
};

/// Row-major width x height raster. Pixel (u, v) is column u, row v.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width_ && v < height_; }
  bool same_shape(const Grid& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  T& operator()(int u, int v) { return data_[offset(u, v)]; }
  const T& operator()(int u, int v) const { return data_[offset(u, v)]; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t offset(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Depth in sensor units (millimetres by default); 0 marks a missing measurement.
using DepthImage = Grid<std::uint16_t>;

/// Per-pixel 2D mask id; 0 is background, 1..M are the frame's predicted masks.
using MaskLabelImage = Grid<std::uint16_t>;

using RgbImage = Grid<Rgb>;

inline constexpr double kDefaultDepthScale = 1000.0;

}  // namespace ovmap
