#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include "skyaug/adam.hpp"
#include "skyaug/image.hpp"
#include "skyaug/layers.hpp"

namespace skyaug {

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 1000;
  std::size_t image_side = 32; ///< must be a multiple of 4
  std::size_t latent_dim = 100;
  std::size_t channels = 64;   ///< widest feature map; the middle one is half
  std::uint64_t seed = 0;
  AdamConfig adam;

  void validate() const;
};

struct LatentVector {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

/// i.i.d. standard normal draws.
LatentVector draw_latent(std::size_t dim, std::mt19937_64& rng);

/// dense(latent -> (side/4)^2 * C) -> ReLU -> reshape [C, side/4, side/4]
/// -> convT(C -> C/2, k4 s2 p1) -> ReLU -> convT(C/2 -> 1, k4 s2 p1) -> tanh
class GeneratorNet {
public:
  GeneratorNet(std::size_t side, std::size_t latent_dim, Init init, std::mt19937_64& rng,
               std::size_t channels = 64);
  GeneratorNet(GeneratorNet&&) noexcept = default;
  GeneratorNet& operator=(GeneratorNet&&) noexcept = default;
  GeneratorNet(const GeneratorNet&) = delete;
  GeneratorNet& operator=(const GeneratorNet&) = delete;

  /// z [N, latent] -> images [N, 1, side, side] in (-1, 1).
  ag::Var forward(const ag::Var& z) const;
  std::vector<NamedParam> parameters() const;
  /// Deep copy; the copy shares no parameter storage with *this.
  GeneratorNet clone() const;

  std::size_t side() const { return side_; }
  std::size_t latent_dim() const { return latent_dim_; }
  std::size_t channels() const { return channels_; }

private:
  std::size_t side_, latent_dim_, channels_;
  Dense fc_;
  ConvTranspose2d up1_, up2_;
};

/// conv(1 -> C/2, k4 s2 p1) -> leaky ReLU(0.2) -> conv(C/2 -> C, k4 s2 p1)
/// -> leaky ReLU(0.2) -> dense((side/4)^2 * C -> 1) -> sigmoid
class DiscriminatorNet {
public:
  DiscriminatorNet(std::size_t side, Init init, std::mt19937_64& rng, std::size_t channels = 64);
  DiscriminatorNet(DiscriminatorNet&&) noexcept = default;
  DiscriminatorNet& operator=(DiscriminatorNet&&) noexcept = default;
  DiscriminatorNet(const DiscriminatorNet&) = delete;
  DiscriminatorNet& operator=(const DiscriminatorNet&) = delete;

  /// Pre-sigmoid scores [N, 1].
  ag::Var logits(const ag::Var& images) const;
  /// Probabilities [N, 1] in (0, 1).
  ag::Var forward(const ag::Var& images) const;
  std::vector<NamedParam> parameters() const;
  DiscriminatorNet clone() const;

  std::size_t side() const { return side_; }
  std::size_t channels() const { return channels_; }

private:
  std::size_t side_, channels_;
  Conv2d down1_, down2_;
  Dense head_;
};

NormalizedImage forward_generator(const GeneratorNet& net, const LatentVector& z);
double forward_discriminator(const DiscriminatorNet& net, const NormalizedImage& img);

/// Stacks images into a [N, 1, side, side] tensor.
Tensor image_batch(const std::vector<const NormalizedImage*>& images);

struct EpochLoss {
  std::size_t epoch = 0; ///< 1-based
  double d_loss = 0.0;
  double g_loss = 0.0;
};

struct GanTrainResult {
  GeneratorNet generator;
  DiscriminatorNet discriminator;
  std::vector<EpochLoss> loss_history;
};

/// Called after each epoch with the 1-based epoch number.
using EpochCallback = std::function<void(std::size_t epoch, const GeneratorNet&)>;

/// Alternating updates, one discriminator step (real = 1, generated = 0)
/// then one generator step (generated = 1) per batch. Shuffling, latent
/// draws, and weight init all come from cfg.seed.
GanTrainResult train_gan(const std::vector<NormalizedImage>& data, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {});

/// n generator samples mapped back to [0, 255]; deterministic per seed.
std::vector<RawImage> sample(const GeneratorNet& net, std::size_t n, std::uint64_t seed);

void write_loss_csv(const std::vector<EpochLoss>& history, const std::filesystem::path& path);

} // namespace skyaug
