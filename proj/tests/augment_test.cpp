#include <gtest/gtest.h>

#include <map>
#include <random>

#include "skyaug/augment.hpp"
#include "support.hpp"

using namespace skyaug;

namespace {

// Brute-force oracle: rotate counter-clockwise by repeated quarter turns,
// then flip.
RawImage rot90_ccw(const RawImage& img) {
  RawImage out(img.height(), img.width());
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      out.at(y, img.width() - 1 - x) = img.at(x, y);
  return out;
}

RawImage oracle(const RawImage& img, TransformId t) {
  RawImage out = img;
  for (int i = 0; i < static_cast<int>(t.rotation); ++i)
    out = rot90_ccw(out);
  const bool h = t.flip == Flip::horizontal || t.flip == Flip::both;
  const bool v = t.flip == Flip::vertical || t.flip == Flip::both;
  RawImage flipped = out;
  for (std::size_t y = 0; y < out.height(); ++y)
    for (std::size_t x = 0; x < out.width(); ++x)
      flipped.at(h ? out.width() - 1 - x : x, v ? out.height() - 1 - y : y) = out.at(x, y);
  return flipped;
}

TEST(Augment, TransformOrderIsRotationMajor) {
  const auto& ts = all_transforms();
  EXPECT_EQ(ts[0], (TransformId{Rotation::r0, Flip::none}));
  EXPECT_EQ(ts[1], (TransformId{Rotation::r0, Flip::horizontal}));
  EXPECT_EQ(ts[4], (TransformId{Rotation::r90, Flip::none}));
  EXPECT_EQ(ts[15], (TransformId{Rotation::r270, Flip::both}));
}

TEST(Augment, MatchesBruteForceOracle) {
  std::mt19937_64 rng(3);
  const auto img = fixtures::random_image(5, 3, rng);
  for (auto t : all_transforms())
    EXPECT_EQ(apply_transform(img, t), oracle(img, t));
}

TEST(Augment, QuarterTurnIsCounterClockwise) {
  RawImage img(2, 2, std::vector<std::uint8_t>{1, 2, 3, 4}); // rows: [1 2] [3 4]
  const auto r = apply_transform(img, {Rotation::r90, Flip::none});
  EXPECT_EQ(r, RawImage(2, 2, std::vector<std::uint8_t>{2, 4, 1, 3}));
}

TEST(Augment, DoubleCover) {
  std::mt19937_64 rng(11);
  const auto img = fixtures::random_image(8, 8, rng);
  const auto folds = sixteen_fold(img);
  ASSERT_EQ(folds.size(), 16u);
  std::map<std::vector<std::uint8_t>, int> counts;
  for (const auto& f : folds)
    ++counts[std::vector<std::uint8_t>(f.values().begin(), f.values().end())];
  EXPECT_EQ(counts.size(), 8u);
  for (const auto& [k, c] : counts)
    EXPECT_EQ(c, 2);
  // The first eight folds already hold the eight distinct elements.
  const auto dedup = sixteen_fold(img, true);
  ASSERT_EQ(dedup.size(), 8u);
  std::map<std::vector<std::uint8_t>, int> first8;
  for (const auto& f : dedup)
    ++first8[std::vector<std::uint8_t>(f.values().begin(), f.values().end())];
  EXPECT_EQ(first8.size(), 8u);
}

TEST(Augment, PairsStayAligned) {
  std::mt19937_64 rng(12);
  LabeledImage pair{fixtures::random_image(6, 4, rng), fixtures::random_map(6, 4, rng)};
  // Encode the map into the image so alignment is checkable per pixel.
  for (std::size_t i = 0; i < pair.image.size(); ++i)
    pair.image[i] = static_cast<std::uint8_t>((pair.image[i] & 0xFE) | pair.map[i]);
  for (const auto& f : sixteen_fold(pair)) {
    ASSERT_TRUE(f.image.same_shape(f.map));
    for (std::size_t i = 0; i < f.image.size(); ++i)
      ASSERT_EQ(f.image[i] & 1, f.map[i]);
  }
}

TEST(Augment, NonSquareShapes) {
  RawImage img(5, 3);
  EXPECT_EQ(apply_transform(img, {Rotation::r90, Flip::none}).width(), 3u);
  EXPECT_EQ(apply_transform(img, {Rotation::r180, Flip::both}).width(), 5u);
}

TEST(Normalize, RoundtripAllIntensities) {
  RawImage img(256, 1);
  for (int i = 0; i < 256; ++i)
    img[i] = static_cast<std::uint8_t>(i);
  const auto n = normalize(img);
  EXPECT_EQ(n[0], -1.0);
  EXPECT_EQ(n[255], 1.0);
  EXPECT_EQ(denormalize(n), img);
}

TEST(Normalize, DenormalizeClampsAndRounds) {
  NormalizedImage n(4, 1, std::vector<double>{-3.0, 3.0, 0.0, -0.996});
  const auto d = denormalize(n);
  EXPECT_EQ(d[0], 0);
  EXPECT_EQ(d[1], 255);
  EXPECT_EQ(d[2], 128); // 127.5 rounds half away from zero
  EXPECT_EQ(d[3], 1);   // 0.51
}

} // namespace
