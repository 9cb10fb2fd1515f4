#include "skyaug/imageio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "skyaug/codec.hpp"
#include "skyaug/error.hpp"

namespace fs = std::filesystem;

namespace skyaug {

RawImage extract_rb(const RgbImage& img) {
  std::vector<std::uint8_t> out(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    // (R - B + 255) is a nonnegative integer, so half-away-from-zero
    // rounding is (v + 1) / 2 in integer arithmetic.
    const int v = int{img[i].r} - int{img[i].b} + 255;
    out[i] = static_cast<std::uint8_t>((v + 1) / 2);
  }
  return RawImage(img.width(), img.height(), std::move(out));
}

SplitSizes split_sizes(std::size_t n) {
  const auto train = static_cast<std::size_t>(std::lround(0.60 * static_cast<double>(n)));
  const auto val = static_cast<std::size_t>(std::lround(0.1565 * static_cast<double>(n)));
  return {train, val, n - train - val};
}

DatasetSplit split_dataset(std::size_t n, std::uint64_t seed) {
  if (n < 3)
    throw UsageError("split impossible: need at least 3 items, got " + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  const auto sizes = split_sizes(n);
  DatasetSplit split;
  split.seed = seed;
  auto first = perm.begin();
  split.train_ids.assign(first, first + sizes.train);
  split.val_ids.assign(first + sizes.train, first + sizes.train + sizes.val);
  split.test_ids.assign(first + sizes.train + sizes.val, perm.end());
  std::ranges::sort(split.train_ids);
  std::ranges::sort(split.val_ids);
  std::ranges::sort(split.test_ids);
  return split;
}

namespace {

struct NetpbmHeader {
  std::string magic;
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 0;
};

std::string read_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty())
        break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

NetpbmHeader read_header(std::istream& in, const fs::path& path) {
  NetpbmHeader h;
  h.magic = read_token(in);
  if (h.magic != "P5" && h.magic != "P6")
    throw DataError(path.string() + ": unsupported format '" + h.magic +
                    "' (expected binary PGM or PPM)");
  try {
    h.width = std::stoul(read_token(in));
    h.height = std::stoul(read_token(in));
    h.maxval = static_cast<unsigned>(std::stoul(read_token(in)));
  } catch (const std::exception&) {
    throw DataError(path.string() + ": malformed header");
  }
  if (h.width == 0 || h.height == 0)
    throw DataError(path.string() + ": dimension zero");
  if (h.maxval == 0 || h.maxval > 65535)
    throw DataError(path.string() + ": malformed header (maxval " + std::to_string(h.maxval) + ")");
  if (h.maxval > 255)
    throw DataError(path.string() + ": unsupported bit depth (maxval " +
                    std::to_string(h.maxval) + ", only 8-bit files are supported)");
  return h;
}

std::vector<std::uint8_t> read_payload(const fs::path& path, const std::string& expect_magic,
                                       std::size_t channels, NetpbmHeader& h) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open " + path.string());
  h = read_header(in, path);
  if (h.magic != expect_magic)
    throw DataError(path.string() + ": expected " + expect_magic + " file, found " + h.magic);
  std::vector<std::uint8_t> buf(h.width * h.height * channels);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw DataError(path.string() + ": truncated pixel data");
  return buf;
}

void write_payload(const fs::path& path, const std::string& magic, std::size_t w, std::size_t h,
                   std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << magic << '\n' << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw DataError("write failed for " + path.string());
}

} // namespace

RawImage load_image_file(const fs::path& path) {
  if (!is_netpbm(path)) {
    auto d = decode_image(path, 1);
    return RawImage(d.width, d.height, std::move(d.bytes));
  }
  NetpbmHeader h;
  auto px = read_payload(path, "P5", 1, h);
  return RawImage(h.width, h.height, std::move(px));
}

void save_image_file(const RawImage& img, const fs::path& path) {
  write_payload(path, "P5", img.width(), img.height(), img.values());
}

BinaryMap load_map_file(const fs::path& path) {
  NetpbmHeader h;
  std::vector<std::uint8_t> px;
  if (is_netpbm(path)) {
    px = read_payload(path, "P5", 1, h);
  } else {
    auto d = decode_image(path, 1);
    h.width = d.width;
    h.height = d.height;
    px = std::move(d.bytes);
  }
  for (auto& v : px)
    v = v >= 128 ? 1 : 0;
  return BinaryMap(h.width, h.height, std::move(px));
}

void save_map_file(const BinaryMap& map, const fs::path& path) {
  std::vector<std::uint8_t> px(map.size());
  std::ranges::transform(map.values(), px.begin(),
                         [](std::uint8_t v) { return std::uint8_t(v ? 255 : 0); });
  write_payload(path, "P5", map.width(), map.height(), px);
}

RgbImage load_rgb_file(const fs::path& path) {
  NetpbmHeader h;
  std::vector<std::uint8_t> raw;
  if (is_netpbm(path)) {
    raw = read_payload(path, "P6", 3, h);
  } else {
    auto d = decode_image(path, 3);
    h.width = d.width;
    h.height = d.height;
    raw = std::move(d.bytes);
  }
  std::vector<Rgb> px(h.width * h.height);
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = {raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]};
  return RgbImage(h.width, h.height, std::move(px));
}

void save_rgb_file(const RgbImage& img, const fs::path& path) {
  std::vector<std::uint8_t> raw(img.size() * 3);
  for (std::size_t i = 0; i < img.size(); ++i) {
    raw[3 * i] = img[i].r;
    raw[3 * i + 1] = img[i].g;
    raw[3 * i + 2] = img[i].b;
  }
  write_payload(path, "P6", img.width(), img.height(), raw);
}

std::string to_string(SplitRole role) {
  switch (role) {
  case SplitRole::train:
    return "train";
  case SplitRole::val:
    return "val";
  case SplitRole::test:
    return "test";
  }
  return "?";
}

SplitRole parse_split_role(const std::string& s) {
  if (s == "train")
    return SplitRole::train;
  if (s == "val")
    return SplitRole::val;
  if (s == "test")
    return SplitRole::test;
  throw DataError("unknown split role '" + s + "'");
}

void write_manifest(const std::vector<ManifestEntry>& entries, const fs::path& path) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << "image_path,map_path,split\n";
  for (const auto& e : entries)
    out << e.image_path.generic_string() << ',' << e.map_path.generic_string() << ','
        << to_string(e.split) << '\n';
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open manifest " + path.string());
  const fs::path base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || (lineno == 1 && line.starts_with("image_path")))
      continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');)
      fields.push_back(f);
    if (fields.size() != 3)
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": malformed manifest record (expected 3 fields)");
    ManifestEntry e;
    e.image_path = fs::path(fields[0]).is_absolute() ? fs::path(fields[0]) : base / fields[0];
    e.map_path = fs::path(fields[1]).is_absolute() ? fs::path(fields[1]) : base / fields[1];
    try {
      e.split = parse_split_role(fields[2]);
    } catch (const DataError& err) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + err.what());
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

namespace {

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// One octave of value noise: random lattice values, smoothstep-bilinear
// interpolation between them.
void add_value_noise(std::vector<double>& field, std::size_t side, std::size_t cell,
                     double amplitude, std::mt19937_64& rng) {
  const std::size_t lattice = side / cell + 2;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> knots(lattice * lattice);
  for (auto& k : knots)
    k = uni(rng);
  for (std::size_t y = 0; y < side; ++y) {
    const double fy = static_cast<double>(y) / static_cast<double>(cell);
    const auto y0 = static_cast<std::size_t>(fy);
    const double ty = smoothstep(fy - static_cast<double>(y0));
    for (std::size_t x = 0; x < side; ++x) {
      const double fx = static_cast<double>(x) / static_cast<double>(cell);
      const auto x0 = static_cast<std::size_t>(fx);
      const double tx = smoothstep(fx - static_cast<double>(x0));
      const double a = knots[y0 * lattice + x0], b = knots[y0 * lattice + x0 + 1];
      const double c = knots[(y0 + 1) * lattice + x0], d = knots[(y0 + 1) * lattice + x0 + 1];
      const double top = a + (b - a) * tx, bottom = c + (d - c) * tx;
      field[y * side + x] += amplitude * (top + (bottom - top) * ty);
    }
  }
}

} // namespace

std::vector<LabeledImage> synth_dataset(std::size_t count, std::size_t side, std::uint64_t seed) {
  if (count < 1)
    throw UsageError("synth_dataset: count must be >= 1");
  if (side < 8)
    throw UsageError("synth_dataset: side must be >= 8");
  std::vector<LabeledImage> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::vector<double> field(side * side, 0.0);
    add_value_noise(field, side, std::max<std::size_t>(2, side / 4), 1.0, rng);
    add_value_noise(field, side, std::max<std::size_t>(1, side / 8), 0.45, rng);

    const auto [lo, hi] = std::ranges::minmax(field);
    const double span = hi > lo ? hi - lo : 1.0;
    std::vector<std::uint8_t> px(field.size());
    for (std::size_t k = 0; k < field.size(); ++k)
      px[k] = static_cast<std::uint8_t>(std::lround((field[k] - lo) / span * 255.0));

    const double mean =
        std::accumulate(px.begin(), px.end(), 0.0) / static_cast<double>(px.size());
    std::vector<std::uint8_t> labels(px.size());
    for (std::size_t k = 0; k < px.size(); ++k)
      labels[k] = px[k] > mean ? 1 : 0;

    out.push_back({RawImage(side, side, std::move(px)), BinaryMap(side, side, std::move(labels))});
  }
  return out;
}

std::vector<LabeledImage> load_rgb_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw DataError("dataset directory not found: " + dir.string());
  const fs::path images = dir / "images";
  if (!fs::is_directory(images))
    throw DataError("dataset has no images/ directory: " + images.string());

  const auto exts = supported_image_extensions();
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(images)) {
    auto ext = entry.path().extension().string();
    std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (entry.is_regular_file() && std::ranges::find(exts, ext) != exts.end())
      files.push_back(entry.path());
  }
  std::ranges::sort(files);
  if (files.empty())
    throw DataError("no readable images found in " + images.string());

  auto find_map = [&](const std::string& stem) -> fs::path {
    for (const char* sub : {"GTmaps", "maps"})
      for (const char* suffix : {"", "_GT"})
        for (const char* ext : {".pgm", ".png", ".jpg", ".jpeg"}) {
          auto p = dir / sub / (stem + suffix + ext);
          if (fs::is_regular_file(p))
            return p;
        }
    throw DataError("no ground-truth map for image '" + stem + "' in " + dir.string());
  };

  std::vector<LabeledImage> out;
  for (const auto& f : files) {
    auto rb = extract_rb(load_rgb_file(f));
    auto map = load_map_file(find_map(f.stem().string()));
    if (!rb.same_shape(map))
      throw DataError("map dimensions differ from image " + f.string());
    out.push_back({std::move(rb), std::move(map)});
  }
  return out;
}

} // namespace skyaug
