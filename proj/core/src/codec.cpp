#include "skyaug/codec.hpp"

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <memory>

#include "skyaug/error.hpp"

#ifdef SKYAUG_HAVE_JPEG
#include <jpeglib.h>
#endif
#ifdef SKYAUG_HAVE_PNG
#include <png.h>
#endif

namespace fs = std::filesystem;

namespace skyaug {

namespace {

std::string lower_ext(const fs::path& p) {
  auto e = p.extension().string();
  std::ranges::transform(e, e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e;
}

#ifdef SKYAUG_HAVE_JPEG
struct JpegErr {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char msg[JMSG_LENGTH_MAX];
};

void jpeg_fail(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->msg);
  std::longjmp(err->jump, 1);
}

void jpeg_quiet(j_common_ptr) {}

DecodedImage decode_jpeg(const fs::path& path, std::size_t channels) {
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!f)
    throw DataError("cannot open " + path.string());
  jpeg_decompress_struct cinfo;
  JpegErr err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_fail;
  err.mgr.output_message = jpeg_quiet;
  DecodedImage out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DataError(path.string() + ": " + err.msg);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = channels == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_start_decompress(&cinfo);
  out.width = cinfo.output_width;
  out.height = cinfo.output_height;
  out.channels = channels;
  out.bytes.resize(out.width * out.height * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.bytes.data() + std::size_t{cinfo.output_scanline} * out.width * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}
#endif

#ifdef SKYAUG_HAVE_PNG
DecodedImage decode_png(const fs::path& path, std::size_t channels) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw DataError(path.string() + ": " + img.message);
  img.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  DecodedImage out;
  out.width = img.width;
  out.height = img.height;
  out.channels = channels;
  out.bytes.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.bytes.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw DataError(path.string() + ": " + msg);
  }
  return out;
}
#endif

} // namespace

bool is_netpbm(const fs::path& path) {
  const auto e = lower_ext(path);
  return e == ".pgm" || e == ".ppm" || e == ".pnm";
}

std::vector<std::string> supported_image_extensions() {
  std::vector<std::string> out{".ppm"};
#ifdef SKYAUG_HAVE_JPEG
  out.insert(out.end(), {".jpg", ".jpeg"});
#endif
#ifdef SKYAUG_HAVE_PNG
  out.push_back(".png");
#endif
  return out;
}

bool has_supported_extension(const fs::path& path) {
  const auto e = lower_ext(path);
  const auto all = supported_image_extensions();
  return e == ".pgm" || std::ranges::find(all, e) != all.end();
}

DecodedImage decode_image(const fs::path& path, std::size_t channels) {
  if (channels != 1 && channels != 3)
    throw UsageError("decode_image: channels must be 1 or 3");
  const auto e = lower_ext(path);
#ifdef SKYAUG_HAVE_JPEG
  if (e == ".jpg" || e == ".jpeg")
    return decode_jpeg(path, channels);
#endif
#ifdef SKYAUG_HAVE_PNG
  if (e == ".png")
    return decode_png(path, channels);
#endif
  throw DataError(path.string() + ": unsupported image format '" + e + "' in this build");
}

} // namespace skyaug
