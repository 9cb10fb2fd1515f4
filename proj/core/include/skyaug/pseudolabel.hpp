#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skyaug/image.hpp"

namespace skyaug {

class GeneratorNet;

struct ClusterConfig {
  std::size_t k = 2; ///< only 2 is supported
  std::size_t max_iters = 100;
  double tol = 1e-6; ///< on centroid movement
  std::uint64_t seed = 0; ///< unused by the min/max initialization; kept for provenance
  /// Label the lower-centroid cluster as cloud instead of the higher one.
  bool invert_cloud_rule = false;
};

struct SmoothConfig {
  std::size_t window_radius = 2; ///< (2r+1)^2 window
  std::size_t max_passes = 3;
};

/// Result of 1-D 2-means over pixel intensities.
struct IntensityClusters {
  double low_centroid = 0.0;
  double high_centroid = 0.0;
  std::size_t iterations = 0;
  /// Intensities >= threshold belong to the high cluster; threshold is 256
  /// when every pixel falls in the low cluster.
  int threshold = 256;
};

/// Lloyd's 2-means on the intensity histogram, centroids seeded at the
/// observed min and max. A pixel joins the high cluster when it is strictly
/// closer to the high centroid. Empty clusters keep their centroid.
IntensityClusters cluster_intensities(const RawImage& img, const ClusterConfig& cfg = {});

/// Higher-centroid cluster is cloud (or lower, with invert_cloud_rule). A
/// constant image is all sky.
BinaryMap kmeans_pixels(const RawImage& img, const ClusterConfig& cfg = {});

/// One synchronous majority-filter pass: each pixel takes the majority
/// label of its (2r+1)^2 window, truncated at the borders. Ties keep the
/// current label.
BinaryMap majority_pass(const BinaryMap& map, std::size_t radius);

struct SmoothResult {
  BinaryMap map;
  std::size_t passes = 0;   ///< passes that changed at least one pixel
  bool converged = false;   ///< last pass was a no-op
};

/// Iterates majority_pass until a fixed point or cfg.max_passes.
SmoothResult smooth_map_detailed(const BinaryMap& map, const SmoothConfig& cfg = {});
BinaryMap smooth_map(const BinaryMap& map, const SmoothConfig& cfg = {});

/// Where a candidate came from.
struct Provenance {
  std::string generator_id; ///< checkpoint hash, or empty for in-memory nets
  std::uint64_t latent_seed = 0;
  std::size_t index = 0;
};

enum class Verdict { unset, favorable, unfavorable };

/// A generated image with its estimated ground truth.
struct Candidate {
  RawImage image;
  BinaryMap map;
  Provenance provenance;
  Verdict verdict = Verdict::unset;
  double r2_val_with = 0.0;
};

/// Pseudo ground truth for one image: cluster, then smooth.
BinaryMap estimate_map(const RawImage& img, const ClusterConfig& cluster_cfg,
                       const SmoothConfig& smooth_cfg);

/// Candidate i is sample(gen, 1, seeds[i]) passed through estimate_map.
std::vector<Candidate> make_candidates(const GeneratorNet& gen, const std::vector<std::uint64_t>& seeds,
                                       const ClusterConfig& cluster_cfg,
                                       const SmoothConfig& smooth_cfg,
                                       const std::string& generator_id = {});

} // namespace skyaug
