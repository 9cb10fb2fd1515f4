#include "skyaug/augment.hpp"

#include <algorithm>
#include <cmath>

namespace skyaug {

const std::array<TransformId, 16>& all_transforms() {
  static const std::array<TransformId, 16> table = [] {
    std::array<TransformId, 16> t{};
    for (int r = 0; r < 4; ++r)
      for (int f = 0; f < 4; ++f)
        t[static_cast<std::size_t>(4 * r + f)] = {static_cast<Rotation>(r), static_cast<Flip>(f)};
    return t;
  }();
  return table;
}

namespace {

// Transforms whose index in all_transforms() is the first occurrence of
// their dihedral element. Flip `both` == rotation by 180, so (r, both)
// duplicates (r + 180, none) and (r, vertical) duplicates (r + 180, horizontal).
constexpr std::array<std::size_t, 8> kDistinct = {0, 1, 2, 3, 4, 5, 6, 7};

} // namespace

template <typename T>
Grid<T> apply_transform(const Grid<T>& img, TransformId t) {
  const std::size_t w = img.width(), h = img.height();
  const bool swap = t.rotation == Rotation::r90 || t.rotation == Rotation::r270;
  const std::size_t ow = swap ? h : w, oh = swap ? w : h;
  Grid<T> out(ow, oh);
  const bool fh = t.flip == Flip::horizontal || t.flip == Flip::both;
  const bool fv = t.flip == Flip::vertical || t.flip == Flip::both;
  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t ox = 0; ox < ow; ++ox) {
      // Undo the flip to find the coordinate in the rotated image.
      const std::size_t rx = fh ? ow - 1 - ox : ox;
      const std::size_t ry = fv ? oh - 1 - oy : oy;
      // Undo the counter-clockwise rotation.
      std::size_t sx = 0, sy = 0;
      switch (t.rotation) {
      case Rotation::r0:
        sx = rx, sy = ry;
        break;
      case Rotation::r90:
        sx = w - 1 - ry, sy = rx;
        break;
      case Rotation::r180:
        sx = w - 1 - rx, sy = h - 1 - ry;
        break;
      case Rotation::r270:
        sx = ry, sy = h - 1 - rx;
        break;
      }
      out.at(ox, oy) = img.at(sx, sy);
    }
  }
  return out;
}

template Grid<std::uint8_t> apply_transform(const Grid<std::uint8_t>&, TransformId);
template Grid<double> apply_transform(const Grid<double>&, TransformId);

BinaryMap apply_transform(const BinaryMap& map, TransformId t) {
  auto g = apply_transform(static_cast<const Grid<std::uint8_t>&>(map), t);
  return BinaryMap(g.width(), g.height(), std::vector<std::uint8_t>(g.values().begin(), g.values().end()));
}

namespace {

template <typename Img>
std::vector<Img> fold(const Img& img, bool dedupe) {
  std::vector<Img> out;
  if (dedupe) {
    out.reserve(kDistinct.size());
    for (auto i : kDistinct)
      out.push_back(apply_transform(img, all_transforms()[i]));
  } else {
    out.reserve(16);
    for (const auto& t : all_transforms())
      out.push_back(apply_transform(img, t));
  }
  return out;
}

} // namespace

std::vector<RawImage> sixteen_fold(const RawImage& img, bool dedupe) { return fold(img, dedupe); }
std::vector<BinaryMap> sixteen_fold(const BinaryMap& map, bool dedupe) { return fold(map, dedupe); }

std::vector<LabeledImage> sixteen_fold(const LabeledImage& pair, bool dedupe) {
  auto imgs = sixteen_fold(pair.image, dedupe);
  auto maps = sixteen_fold(pair.map, dedupe);
  std::vector<LabeledImage> out;
  out.reserve(imgs.size());
  for (std::size_t i = 0; i < imgs.size(); ++i)
    out.push_back({std::move(imgs[i]), std::move(maps[i])});
  return out;
}

NormalizedImage normalize(const RawImage& img) {
  std::vector<double> v(img.size());
  std::ranges::transform(img.values(), v.begin(),
                         [](std::uint8_t p) { return static_cast<double>(p) / 127.5 - 1.0; });
  return NormalizedImage(img.width(), img.height(), std::move(v));
}

RawImage denormalize(const NormalizedImage& img) {
  std::vector<std::uint8_t> v(img.size());
  std::ranges::transform(img.values(), v.begin(), [](double x) {
    // std::round rounds halfway cases away from zero.
    const double p = std::round(std::clamp(x, -1.0, 1.0) * 127.5 + 127.5);
    return static_cast<std::uint8_t>(std::clamp(p, 0.0, 255.0));
  });
  return RawImage(img.width(), img.height(), std::move(v));
}

} // namespace skyaug
