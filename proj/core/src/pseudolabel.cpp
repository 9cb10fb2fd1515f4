#include "skyaug/pseudolabel.hpp"

#include <array>
#include <cmath>

#include "skyaug/error.hpp"
#include "skyaug/gan.hpp"

namespace skyaug {

IntensityClusters cluster_intensities(const RawImage& img, const ClusterConfig& cfg) {
  if (cfg.k != 2)
    throw UsageError("only 2-cluster segmentation is supported, got k = " + std::to_string(cfg.k));
  std::array<std::size_t, 256> hist{};
  for (auto v : img.values())
    ++hist[v];
  int lo = 0, hi = 255;
  while (hist[static_cast<std::size_t>(lo)] == 0)
    ++lo;
  while (hist[static_cast<std::size_t>(hi)] == 0)
    --hi;

  IntensityClusters out;
  out.low_centroid = lo;
  out.high_centroid = hi;
  if (lo == hi)
    return out;

  // Threshold t: intensities >= t are strictly closer to the high centroid.
  auto boundary = [](double c_lo, double c_hi) {
    const double mid = 0.5 * (c_lo + c_hi);
    return static_cast<int>(std::floor(mid)) + 1;
  };

  for (out.iterations = 1; out.iterations <= cfg.max_iters; ++out.iterations) {
    const int t = boundary(out.low_centroid, out.high_centroid);
    double s_lo = 0, s_hi = 0;
    std::size_t n_lo = 0, n_hi = 0;
    for (int v = 0; v < 256; ++v) {
      const auto c = hist[static_cast<std::size_t>(v)];
      if (v >= t) {
        s_hi += static_cast<double>(c) * v;
        n_hi += c;
      } else {
        s_lo += static_cast<double>(c) * v;
        n_lo += c;
      }
    }
    const double new_lo = n_lo ? s_lo / static_cast<double>(n_lo) : out.low_centroid;
    const double new_hi = n_hi ? s_hi / static_cast<double>(n_hi) : out.high_centroid;
    const double moved = std::max(std::abs(new_lo - out.low_centroid),
                                  std::abs(new_hi - out.high_centroid));
    out.low_centroid = new_lo;
    out.high_centroid = new_hi;
    if (moved < cfg.tol)
      break;
  }
  out.iterations = std::min(out.iterations, cfg.max_iters);
  out.threshold = boundary(out.low_centroid, out.high_centroid);
  return out;
}

BinaryMap kmeans_pixels(const RawImage& img, const ClusterConfig& cfg) {
  const auto clusters = cluster_intensities(img, cfg);
  BinaryMap map(img.width(), img.height(), false);
  if (clusters.low_centroid == clusters.high_centroid)
    return map;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const bool high = img[i] >= clusters.threshold;
    map[i] = (high != cfg.invert_cloud_rule) ? 1 : 0;
  }
  return map;
}

BinaryMap majority_pass(const BinaryMap& map, std::size_t radius) {
  if (radius < 1)
    throw UsageError("smoothing window radius must be >= 1");
  const std::size_t w = map.width(), h = map.height();
  // Summed-area table of cloud labels, (w+1) x (h+1).
  std::vector<std::size_t> sat((w + 1) * (h + 1), 0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      sat[(y + 1) * (w + 1) + x + 1] = map.at(x, y) + sat[y * (w + 1) + x + 1] +
                                       sat[(y + 1) * (w + 1) + x] - sat[y * (w + 1) + x];

  BinaryMap out(w, h, false);
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t y0 = y >= radius ? y - radius : 0, y1 = std::min(h, y + radius + 1);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t x0 = x >= radius ? x - radius : 0, x1 = std::min(w, x + radius + 1);
      const std::size_t clouds = sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] -
                                 sat[y1 * (w + 1) + x0] + sat[y0 * (w + 1) + x0];
      const std::size_t total = (y1 - y0) * (x1 - x0);
      if (2 * clouds > total)
        out.set(x, y, true);
      else if (2 * clouds < total)
        out.set(x, y, false);
      else
        out.at(x, y) = map.at(x, y);
    }
  }
  return out;
}

SmoothResult smooth_map_detailed(const BinaryMap& map, const SmoothConfig& cfg) {
  SmoothResult r{map, 0, false};
  for (std::size_t pass = 0; pass < cfg.max_passes; ++pass) {
    auto next = majority_pass(r.map, cfg.window_radius);
    if (next == r.map) {
      r.converged = true;
      return r;
    }
    r.map = std::move(next);
    ++r.passes;
  }
  r.converged = majority_pass(r.map, cfg.window_radius) == r.map;
  return r;
}

BinaryMap smooth_map(const BinaryMap& map, const SmoothConfig& cfg) {
  return smooth_map_detailed(map, cfg).map;
}

BinaryMap estimate_map(const RawImage& img, const ClusterConfig& cluster_cfg,
                       const SmoothConfig& smooth_cfg) {
  return smooth_map(kmeans_pixels(img, cluster_cfg), smooth_cfg);
}

std::vector<Candidate> make_candidates(const GeneratorNet& gen,
                                       const std::vector<std::uint64_t>& seeds,
                                       const ClusterConfig& cluster_cfg,
                                       const SmoothConfig& smooth_cfg,
                                       const std::string& generator_id) {
  std::vector<Candidate> out;
  out.reserve(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    Candidate c;
    c.image = std::move(sample(gen, 1, seeds[i]).front());
    c.map = estimate_map(c.image, cluster_cfg, smooth_cfg);
    c.provenance = {generator_id, seeds[i], i};
    out.push_back(std::move(c));
  }
  return out;
}

} // namespace skyaug
