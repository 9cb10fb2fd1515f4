#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "skyaug/evalmetrics.hpp"
#include "skyaug/filtering.hpp"
#include "skyaug/gan.hpp"
#include "skyaug/pseudolabel.hpp"

namespace skyaug {

/// Every knob of the end-to-end run. Defaults follow the published setup
/// where it gives one (batch 32, 1000 epochs, learning rate 0.00025).
struct PipelineConfig {
  std::string dataset = "synthetic"; ///< "synthetic" or an RGB dataset directory
  std::filesystem::path manifest;    ///< optional explicit split manifest
  std::size_t synthetic_count = 115;
  std::uint64_t synthetic_seed = 3;
  std::size_t side = 32;
  std::uint64_t split_seed = 7;

  TrainConfig gan;
  bool dedupe_folds = false;

  ClusterConfig cluster;
  SmoothConfig smooth;
  std::size_t candidates = 64;
  std::uint64_t candidate_seed = 1000;

  std::size_t pls_max_comp = 20;
  R2Mode r2_mode = R2Mode::pooled;
  FilterMode filter_mode = FilterMode::independent;
  ThresholdCriterion threshold = ThresholdCriterion::youden;

  std::filesystem::path output = "skyaug_out";

  PipelineConfig() { gan.seed = 11; }

  /// Applies one `key = value` assignment; unknown keys are a UsageError.
  void set(const std::string& key, const std::string& value);
  /// Canonical key/value snapshot, sorted by key.
  std::map<std::string, std::string> snapshot() const;
  void validate() const;
};

struct ConfigKeyDoc {
  std::string key;
  std::string description;
};

/// Documented key list in file order.
const std::vector<ConfigKeyDoc>& config_reference();

/// Parses a flat `key = value` file; `#` starts a comment.
PipelineConfig load_config(const std::filesystem::path& path);
/// Same syntax from a string (used for --set overrides and tests).
void apply_config_text(PipelineConfig& cfg, const std::string& text, const std::string& origin);
/// Writes every key with its current value, preceded by its description.
std::string render_config(const PipelineConfig& cfg);

} // namespace skyaug

namespace skyaug {
/// Library version string, e.g. "0.3.0".
const char* library_version();
} // namespace skyaug
