#pragma once

#include <array>
#include <vector>

#include "skyaug/image.hpp"

namespace skyaug {

/// Counter-clockwise rotation.
enum class Rotation { r0 = 0, r90 = 1, r180 = 2, r270 = 3 };
enum class Flip { none = 0, horizontal = 1, vertical = 2, both = 3 };

/// One of the 16 rotation x flip combinations. The rotation is applied
/// first, then the flip. `horizontal` mirrors left/right, `vertical`
/// mirrors top/bottom.
struct TransformId {
  Rotation rotation = Rotation::r0;
  Flip flip = Flip::none;

  friend bool operator==(const TransformId&, const TransformId&) = default;
};

/// All 16 transforms, rotations major and flips minor:
/// (r0,none), (r0,horizontal), (r0,vertical), (r0,both), (r90,none), ...
const std::array<TransformId, 16>& all_transforms();

/// Exact pixel permutation; 90 and 270 degree rotations swap width/height.
template <typename T>
Grid<T> apply_transform(const Grid<T>& img, TransformId t);
BinaryMap apply_transform(const BinaryMap& map, TransformId t);

/// One output per entry of all_transforms(), in that order. Because flip
/// `both` equals a 180 degree rotation, each of the 8 dihedral symmetries
/// appears twice. With `dedupe`, only the first 8 distinct transforms
/// (as functions) are kept.
std::vector<RawImage> sixteen_fold(const RawImage& img, bool dedupe = false);
std::vector<BinaryMap> sixteen_fold(const BinaryMap& map, bool dedupe = false);
std::vector<LabeledImage> sixteen_fold(const LabeledImage& pair, bool dedupe = false);

/// pixel / 127.5 - 1
NormalizedImage normalize(const RawImage& img);
/// round(x * 127.5 + 127.5) with ties away from zero; inputs are clamped
/// to [-1, 1] first.
RawImage denormalize(const NormalizedImage& img);

extern template Grid<std::uint8_t> apply_transform(const Grid<std::uint8_t>&, TransformId);
extern template Grid<double> apply_transform(const Grid<double>&, TransformId);

} // namespace skyaug
