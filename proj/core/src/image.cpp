#include "skyaug/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skyaug/error.hpp"

namespace skyaug {

template <typename T>
Grid<T>::Grid(std::size_t width, std::size_t height, T fill)
    : width_(width), height_(height), values_(width * height, fill) {
  if (width == 0 || height == 0)
    throw UsageError("image dimensions must be positive");
}

template <typename T>
Grid<T>::Grid(std::size_t width, std::size_t height, std::vector<T> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width == 0 || height == 0)
    throw UsageError("image dimensions must be positive");
  if (values_.size() != width * height)
    throw UsageError("pixel count " + std::to_string(values_.size()) + " does not match " +
                     std::to_string(width) + "x" + std::to_string(height));
}

template class Grid<Rgb>;
template class Grid<std::uint8_t>;
template class Grid<double>;

BinaryMap::BinaryMap(std::size_t width, std::size_t height, bool fill)
    : Grid<std::uint8_t>(width, height, fill ? 1 : 0) {}

BinaryMap::BinaryMap(std::size_t width, std::size_t height, std::vector<std::uint8_t> labels)
    : Grid<std::uint8_t>(width, height, std::move(labels)) {
  for (auto& v : values())
    v = v != 0 ? 1 : 0;
}

std::size_t BinaryMap::cloud_count() const {
  return static_cast<std::size_t>(std::count(values().begin(), values().end(), std::uint8_t{1}));
}

namespace {

// Area-weighted average of src over the destination cell grid.
std::vector<double> box_average(std::span<const std::uint8_t> src, std::size_t sw,
                                std::size_t sh, std::size_t dw, std::size_t dh) {
  if (dw == 0 || dh == 0)
    throw UsageError("resize target dimensions must be positive");
  std::vector<double> out(dw * dh, 0.0);
  const double fx = static_cast<double>(sw) / static_cast<double>(dw);
  const double fy = static_cast<double>(sh) / static_cast<double>(dh);
  for (std::size_t oy = 0; oy < dh; ++oy) {
    const double y0 = oy * fy, y1 = (oy + 1) * fy;
    for (std::size_t ox = 0; ox < dw; ++ox) {
      const double x0 = ox * fx, x1 = (ox + 1) * fx;
      double acc = 0.0, area = 0.0;
      for (auto sy = static_cast<std::size_t>(std::floor(y0));
           sy < std::min(sh, static_cast<std::size_t>(std::ceil(y1))); ++sy) {
        const double wy = std::min<double>(y1, sy + 1) - std::max<double>(y0, sy);
        for (auto sx = static_cast<std::size_t>(std::floor(x0));
             sx < std::min(sw, static_cast<std::size_t>(std::ceil(x1))); ++sx) {
          const double wx = std::min<double>(x1, sx + 1) - std::max<double>(x0, sx);
          acc += wx * wy * src[sy * sw + sx];
          area += wx * wy;
        }
      }
      out[oy * dw + ox] = acc / area;
    }
  }
  return out;
}

} // namespace

RawImage resize_box(const RawImage& img, std::size_t width, std::size_t height) {
  auto avg = box_average(img.values(), img.width(), img.height(), width, height);
  std::vector<std::uint8_t> px(avg.size());
  std::transform(avg.begin(), avg.end(), px.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
  });
  return RawImage(width, height, std::move(px));
}

BinaryMap resize_box(const BinaryMap& map, std::size_t width, std::size_t height) {
  auto avg = box_average(map.values(), map.width(), map.height(), width, height);
  std::vector<std::uint8_t> px(avg.size());
  std::transform(avg.begin(), avg.end(), px.begin(),
                 [](double v) { return static_cast<std::uint8_t>(v >= 0.5 ? 1 : 0); });
  return BinaryMap(width, height, std::move(px));
}

} // namespace skyaug
