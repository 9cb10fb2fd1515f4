#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace skyaug {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 2-D grid with positive dimensions. Base for every image type
/// in the pipeline; pixel (x, y) lives at index y * width + x.
template <typename T>
class Grid {
public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t width, std::size_t height, T fill = T{});
  Grid(std::size_t width, std::size_t height, std::vector<T> values);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T& at(std::size_t x, std::size_t y) { return values_[y * width_ + x]; }
  const T& at(std::size_t x, std::size_t y) const { return values_[y * width_ + x]; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<const T> values() const noexcept { return values_; }
  std::span<T> values() noexcept { return values_; }

  bool same_shape(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> values_;
};

/// 8-bit RGB image as read from disk.
using RgbImage = Grid<Rgb>;

/// Single-channel 8-bit intensity image (the rescaled R-B channel).
using RawImage = Grid<std::uint8_t>;

/// Real-valued image in [-1, 1], the GAN working representation.
using NormalizedImage = Grid<double>;

/// Per-pixel cloud (true) / sky (false) labels.
class BinaryMap : public Grid<std::uint8_t> {
public:
  BinaryMap() = default;
  BinaryMap(std::size_t width, std::size_t height, bool fill = false);
  /// Any nonzero entry is stored as 1.
  BinaryMap(std::size_t width, std::size_t height, std::vector<std::uint8_t> labels);

  void set(std::size_t x, std::size_t y, bool cloud) { at(x, y) = cloud ? 1 : 0; }

  bool cloud(std::size_t x, std::size_t y) const { return at(x, y) != 0; }
  std::size_t cloud_count() const;
};

/// Image paired with its ground truth map.
struct LabeledImage {
  RawImage image;
  BinaryMap map;
};

/// Box-filter resize (area average). Shrinking to an integer factor is an
/// exact block mean; other ratios use fractional pixel coverage.
RawImage resize_box(const RawImage& img, std::size_t width, std::size_t height);

/// Resize a map by box-averaging its labels and keeping pixels with
/// coverage >= 0.5 as cloud.
BinaryMap resize_box(const BinaryMap& map, std::size_t width, std::size_t height);

extern template class Grid<Rgb>;
extern template class Grid<std::uint8_t>;
extern template class Grid<double>;

} // namespace skyaug
