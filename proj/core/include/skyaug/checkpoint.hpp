#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "skyaug/tensor.hpp"

namespace skyaug {

// Binary layout, all integers little-endian:
//   magic      8 bytes  "SKYAUGCK"
//   version    u32      (1)
//   kind       u32 length + bytes   e.g. "generator", "pls"
//   count      u32      number of entries
//   per entry: u32 name length, name bytes, u32 rank, rank x u64 dims,
//              prod(dims) x f64 (IEEE-754 binary64, little-endian)
struct Checkpoint {
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  std::string kind;
  std::vector<Entry> entries;

  const Tensor& get(const std::string& name) const;
  /// Scalar stored as a shape-{1} tensor.
  double scalar(const std::string& name) const;
  void put(std::string name, Tensor t);
  void put_scalar(std::string name, double v);
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

class GeneratorNet;
class DiscriminatorNet;

Checkpoint to_checkpoint(const GeneratorNet& net);
Checkpoint to_checkpoint(const DiscriminatorNet& net);
GeneratorNet generator_from_checkpoint(const Checkpoint& ckpt);
DiscriminatorNet discriminator_from_checkpoint(const Checkpoint& ckpt);

} // namespace skyaug
