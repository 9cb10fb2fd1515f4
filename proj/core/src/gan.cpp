#include "skyaug/gan.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "skyaug/augment.hpp"
#include "skyaug/error.hpp"
#include "skyaug/format.hpp"

namespace skyaug {

void TrainConfig::validate() const {
  if (batch_size < 1)
    throw UsageError("batch_size must be >= 1");
  if (epochs < 1)
    throw UsageError("epochs must be >= 1");
  if (image_side < 4 || image_side % 4 != 0)
    throw UsageError("image_side must be a positive multiple of 4, got " +
                     std::to_string(image_side));
  if (latent_dim < 1)
    throw UsageError("latent_dim must be >= 1");
  if (channels < 2 || channels % 2 != 0)
    throw UsageError("channels must be an even number >= 2");
}

LatentVector draw_latent(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  LatentVector z;
  z.values.resize(dim);
  for (auto& v : z.values)
    v = dist(rng);
  return z;
}

namespace {

constexpr ag::ConvGeometry kUpDown{4, 2, 1};
constexpr double kLeakySlope = 0.2;

void copy_parameters(const std::vector<NamedParam>& from, const std::vector<NamedParam>& to) {
  for (std::size_t i = 0; i < from.size(); ++i) {
    ag::Var dst = to[i].var;
    dst.mutable_value() = from[i].var.value();
  }
}

void set_requires_grad(const std::vector<NamedParam>& params, bool on) {
  for (const auto& p : params)
    p.var.node().requires_grad = on;
}

} // namespace

GeneratorNet::GeneratorNet(std::size_t side, std::size_t latent_dim, Init init,
                           std::mt19937_64& rng, std::size_t channels)
    : side_(side), latent_dim_(latent_dim), channels_(channels) {
  if (side < 4 || side % 4 != 0)
    throw UsageError("generator side must be a positive multiple of 4");
  const std::size_t q = side / 4;
  fc_ = Dense("generator.fc", latent_dim, q * q * channels, init, rng);
  up1_ = ConvTranspose2d("generator.up1", channels, channels / 2, kUpDown, init, rng);
  up2_ = ConvTranspose2d("generator.up2", channels / 2, 1, kUpDown, init, rng);
}

ag::Var GeneratorNet::forward(const ag::Var& z) const {
  if (z.value().rank() != 2 || z.value().dim(1) != latent_dim_)
    throw UsageError("generator expects latent batch [N, " + std::to_string(latent_dim_) +
                     "], got " + shape_string(z.shape()));
  const std::size_t n = z.value().dim(0), q = side_ / 4;
  auto h = ag::relu(fc_(z), "generator.fc.relu");
  h = ag::reshape(h, {n, channels_, q, q});
  h = ag::relu(up1_(h), "generator.up1.relu");
  return ag::tanh(up2_(h), "generator.out.tanh");
}

std::vector<NamedParam> GeneratorNet::parameters() const {
  std::vector<NamedParam> out;
  fc_.collect(out);
  up1_.collect(out);
  up2_.collect(out);
  return out;
}

GeneratorNet GeneratorNet::clone() const {
  std::mt19937_64 unused(0);
  GeneratorNet copy(side_, latent_dim_, Init::zeros, unused, channels_);
  copy_parameters(parameters(), copy.parameters());
  return copy;
}

DiscriminatorNet::DiscriminatorNet(std::size_t side, Init init, std::mt19937_64& rng,
                                   std::size_t channels)
    : side_(side), channels_(channels) {
  if (side < 4 || side % 4 != 0)
    throw UsageError("discriminator side must be a positive multiple of 4");
  const std::size_t q = side / 4;
  down1_ = Conv2d("discriminator.down1", 1, channels / 2, kUpDown, init, rng);
  down2_ = Conv2d("discriminator.down2", channels / 2, channels, kUpDown, init, rng);
  head_ = Dense("discriminator.head", q * q * channels, 1, init, rng);
}

ag::Var DiscriminatorNet::logits(const ag::Var& images) const {
  const auto& s = images.shape();
  if (s.size() != 4 || s[1] != 1 || s[2] != side_ || s[3] != side_)
    throw UsageError("discriminator expects images [N, 1, " + std::to_string(side_) + ", " +
                     std::to_string(side_) + "], got " + shape_string(s));
  const std::size_t n = s[0], q = side_ / 4;
  auto h = ag::leaky_relu(down1_(images), kLeakySlope, "discriminator.down1.leaky");
  h = ag::leaky_relu(down2_(h), kLeakySlope, "discriminator.down2.leaky");
  h = ag::reshape(h, {n, q * q * channels_});
  return head_(h);
}

ag::Var DiscriminatorNet::forward(const ag::Var& images) const {
  return ag::sigmoid(logits(images), "discriminator.out.sigmoid");
}

std::vector<NamedParam> DiscriminatorNet::parameters() const {
  std::vector<NamedParam> out;
  down1_.collect(out);
  down2_.collect(out);
  head_.collect(out);
  return out;
}

DiscriminatorNet DiscriminatorNet::clone() const {
  std::mt19937_64 unused(0);
  DiscriminatorNet copy(side_, Init::zeros, unused, channels_);
  copy_parameters(parameters(), copy.parameters());
  return copy;
}

NormalizedImage forward_generator(const GeneratorNet& net, const LatentVector& z) {
  if (z.dim() != net.latent_dim())
    throw UsageError("latent dimension " + std::to_string(z.dim()) + " does not match generator input " +
                     std::to_string(net.latent_dim()));
  auto out = net.forward(ag::Var::constant(Tensor({1, z.dim()}, z.values)));
  const auto& v = out.value().values();
  return NormalizedImage(net.side(), net.side(), std::vector<double>(v.begin(), v.end()));
}

double forward_discriminator(const DiscriminatorNet& net, const NormalizedImage& img) {
  if (img.width() != net.side() || img.height() != net.side())
    throw UsageError("image is " + std::to_string(img.width()) + "x" +
                     std::to_string(img.height()) + ", discriminator expects side " +
                     std::to_string(net.side()));
  auto out = net.forward(ag::Var::constant(image_batch({&img})));
  return out.value()[0];
}

Tensor image_batch(const std::vector<const NormalizedImage*>& images) {
  if (images.empty())
    throw UsageError("image_batch: no images");
  const std::size_t w = images.front()->width(), h = images.front()->height();
  Tensor t({images.size(), 1, h, w});
  double* dst = t.data();
  for (const auto* img : images) {
    if (img->width() != w || img->height() != h)
      throw UsageError("image_batch: images differ in size");
    dst = std::copy(img->values().begin(), img->values().end(), dst);
  }
  return t;
}

GanTrainResult train_gan(const std::vector<NormalizedImage>& data, const TrainConfig& cfg,
                         const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.empty())
    throw DataError("train_gan: empty training data");
  for (const auto& img : data)
    if (img.width() != cfg.image_side || img.height() != cfg.image_side)
      throw DataError("train_gan: image of size " + std::to_string(img.width()) + "x" +
                      std::to_string(img.height()) + " does not match image_side " +
                      std::to_string(cfg.image_side));

  std::mt19937_64 rng(cfg.seed);
  GeneratorNet gen(cfg.image_side, cfg.latent_dim, Init::normal, rng, cfg.channels);
  DiscriminatorNet disc(cfg.image_side, Init::normal, rng, cfg.channels);
  const auto g_params = gen.parameters();
  const auto d_params = disc.parameters();
  AdamState g_opt{cfg.adam, {}, {}, 0};
  AdamState d_opt{cfg.adam, {}, {}, 0};

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<EpochLoss> history;
  history.reserve(cfg.epochs);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double d_sum = 0.0, g_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, order.size() - start);
      std::vector<const NormalizedImage*> batch;
      batch.reserve(b);
      for (std::size_t i = start; i < start + b; ++i)
        batch.push_back(&data[order[i]]);
      auto real = ag::Var::constant(image_batch(batch), "real");

      Tensor z({b, cfg.latent_dim});
      for (auto& v : z.values())
        v = normal(rng);
      auto fake = gen.forward(ag::Var::constant(std::move(z), "latent"));

      // Discriminator step on a detached copy of the generated batch.
      zero_grads(d_params);
      auto d_loss = ag::add(ag::sigmoid_bce(disc.logits(real), 1.0, "d_loss.real"),
                            ag::sigmoid_bce(disc.logits(ag::detach(fake)), 0.0, "d_loss.fake"));
      ag::backward(d_loss);
      adam_step(d_opt, d_params);

      // Generator step through the updated discriminator; its weights stay frozen.
      set_requires_grad(d_params, false);
      zero_grads(g_params);
      auto g_loss = ag::sigmoid_bce(disc.logits(fake), 1.0, "g_loss");
      ag::backward(g_loss);
      adam_step(g_opt, g_params);
      set_requires_grad(d_params, true);

      d_sum += d_loss.value()[0];
      g_sum += g_loss.value()[0];
      ++batches;
    }
    history.push_back({epoch, d_sum / static_cast<double>(batches),
                       g_sum / static_cast<double>(batches)});
    if (on_epoch)
      on_epoch(epoch, gen);
  }
  return {std::move(gen), std::move(disc), std::move(history)};
}

std::vector<RawImage> sample(const GeneratorNet& net, std::size_t n, std::uint64_t seed) {
  std::vector<RawImage> out;
  if (n == 0)
    return out;
  std::mt19937_64 rng(seed);
  Tensor z({n, net.latent_dim()});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : z.values())
    v = normal(rng);
  auto imgs = net.forward(ag::Var::constant(std::move(z)));
  const std::size_t plane = net.side() * net.side();
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = imgs.value().data() + i * plane;
    out.push_back(denormalize(NormalizedImage(net.side(), net.side(),
                                              std::vector<double>(p, p + plane))));
  }
  return out;
}

void write_loss_csv(const std::vector<EpochLoss>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << "epoch,d_loss,g_loss\n";
  for (const auto& e : history)
    out << e.epoch << ',' << fmt_real(e.d_loss) << ',' << fmt_real(e.g_loss) << '\n';
}

} // namespace skyaug
