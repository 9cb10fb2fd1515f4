#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "skyaug/image.hpp"

namespace skyaug {

/// R-B channel rescaled to 8 bits: round((R - B + 255) / 2), ties away from zero.
RawImage extract_rb(const RgbImage& img);

struct DatasetSplit {
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> val_ids;
  std::vector<std::size_t> test_ids;
  std::uint64_t seed = 0;
};

/// Sizes used by split_dataset: round(0.60 n), round(0.1565 n), remainder.
struct SplitSizes {
  std::size_t train, val, test;
};
SplitSizes split_sizes(std::size_t n);

/// Seeded shuffle partition of 0..n-1. Each list is returned sorted.
DatasetSplit split_dataset(std::size_t n, std::uint64_t seed);

// Netpbm files: binary PGM (P5) for intensities and maps, binary PPM (P6)
// for RGB input. Only 8-bit files (maxval <= 255) are accepted. The loaders
// also read .jpg/.jpeg/.png when built with libjpeg/libpng; savers always
// write Netpbm.
RawImage load_image_file(const std::filesystem::path& path);
void save_image_file(const RawImage& img, const std::filesystem::path& path);
/// Maps are stored as {0, 255}; on load any value >= 128 is cloud.
BinaryMap load_map_file(const std::filesystem::path& path);
void save_map_file(const BinaryMap& map, const std::filesystem::path& path);
RgbImage load_rgb_file(const std::filesystem::path& path);
void save_rgb_file(const RgbImage& img, const std::filesystem::path& path);

enum class SplitRole { train, val, test };
std::string to_string(SplitRole role);
SplitRole parse_split_role(const std::string& s);

struct ManifestEntry {
  std::filesystem::path image_path;
  std::filesystem::path map_path;
  SplitRole split = SplitRole::train;
};

/// Writes `image_path,map_path,split` with a header row. Paths are written
/// as given (callers normally pass paths relative to the manifest).
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);
/// Relative paths in the file are resolved against the manifest directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Procedural cloud textures: two octaves of smoothed value noise rescaled
/// to [0, 255]. Each map is `pixel > mean(pixels)` of its own image.
std::vector<LabeledImage> synth_dataset(std::size_t count, std::size_t side, std::uint64_t seed);

/// Loads an RGB dataset directory: `images/<stem>.{ppm,jpg,png}` with maps in
/// `GTmaps/` or `maps/` named `<stem>` or `<stem>_GT` with a .pgm, .png or
/// .jpg extension. Each image
/// is reduced to its R-B channel. Entries are ordered by file name.
std::vector<LabeledImage> load_rgb_dataset(const std::filesystem::path& dir);

} // namespace skyaug
