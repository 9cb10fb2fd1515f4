#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace skyaug {

/// Interleaved 8-bit pixels, row-major.
struct DecodedImage {
  std::size_t width = 0, height = 0, channels = 0;
  std::vector<std::uint8_t> bytes;
};

/// JPEG and PNG decoding, when the library was built with libjpeg / libpng.
/// channels is 1 (converted to gray) or 3 (converted to RGB).
DecodedImage decode_image(const std::filesystem::path& path, std::size_t channels);

bool is_netpbm(const std::filesystem::path& path);
/// RGB input extensions this build can read, lower case with the dot.
std::vector<std::string> supported_image_extensions();
bool has_supported_extension(const std::filesystem::path& path);

} // namespace skyaug
