#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "skyaug/config.hpp"

namespace skyaug {

enum class Stage {
  prepare,
  train_gan,
  sample_gan,
  pseudolabel,
  tune_pls,
  filter,
  train_final,
  evaluate,
  report,
};

/// Stages in execution order.
const std::vector<Stage>& all_stages();
/// CLI spelling, e.g. "train-gan".
std::string to_string(Stage s);
Stage parse_stage(const std::string& name);

struct StageResult {
  Stage stage = Stage::prepare;
  bool skipped = false; ///< inputs unchanged and outputs intact
  double seconds = 0.0;
};

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

/// Case names used in the comparison tables.
inline constexpr const char* kWithoutAugmentation = "without_augmentation";
inline constexpr const char* kAfterAugmentation = "after_augmentation";

/// Runs pipeline stages against an output directory. Every stage reads its
/// inputs from disk, writes its artifacts, and records input and output
/// hashes in `run_manifest.json`. A stage whose input hash and outputs are
/// unchanged is skipped unless forced.
class Pipeline {
public:
  explicit Pipeline(PipelineConfig cfg, std::ostream* log = nullptr);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  StageResult run(Stage stage, bool force = false);
  std::vector<StageResult> run_all(bool force = false);

  const PipelineConfig& config() const { return cfg_; }
  std::filesystem::path artifact(const std::string& relative) const { return cfg_.output / relative; }

private:
  struct State;
  PipelineConfig cfg_;
  std::ostream* log_;
  std::unique_ptr<State> state_;
};

} // namespace skyaug
