#include "skyaug/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "skyaug/error.hpp"
#include "skyaug/gan.hpp"

namespace fs = std::filesystem;

namespace skyaug {

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name)
      return e.tensor;
  throw DataError("checkpoint '" + kind + "' has no entry '" + name + "'");
}

double Checkpoint::scalar(const std::string& name) const {
  const auto& t = get(name);
  if (t.numel() != 1)
    throw DataError("checkpoint entry '" + name + "' is not a scalar");
  return t[0];
}

void Checkpoint::put(std::string name, Tensor t) { entries.push_back({std::move(name), std::move(t)}); }

void Checkpoint::put_scalar(std::string name, double v) { put(std::move(name), Tensor({1}, v)); }

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'K', 'Y', 'A', 'U', 'G', 'C', 'K'};

template <typename U>
void put_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> b{};
  for (std::size_t i = 0; i < sizeof(U); ++i)
    b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), b.size());
}

template <typename U>
U get_le(std::istream& in, const fs::path& path) {
  std::array<unsigned char, sizeof(U)> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!in)
    throw DataError(path.string() + ": truncated checkpoint");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, const fs::path& path) {
  const auto n = get_le<std::uint32_t>(in, path);
  if (n > (1u << 20))
    throw DataError(path.string() + ": implausible string length in checkpoint");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in)
    throw DataError(path.string() + ": truncated checkpoint");
  return s;
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const fs::path& path) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_string(out, ckpt.kind);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.entries.size()));
  for (const auto& e : ckpt.entries) {
    put_string(out, e.name);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.tensor.rank()));
    for (auto d : e.tensor.shape())
      put_le<std::uint64_t>(out, d);
    for (double v : e.tensor.values())
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out)
    throw DataError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic)
    throw DataError(path.string() + ": not a checkpoint file (bad magic)");
  const auto version = get_le<std::uint32_t>(in, path);
  if (version != kCheckpointVersion)
    throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.kind = get_string(in, path);
  const auto count = get_le<std::uint32_t>(in, path);
  for (std::uint32_t i = 0; i < count; ++i) {
    Checkpoint::Entry e;
    e.name = get_string(in, path);
    const auto rank = get_le<std::uint32_t>(in, path);
    if (rank > 8)
      throw DataError(path.string() + ": implausible tensor rank " + std::to_string(rank));
    Shape shape(rank);
    for (auto& d : shape)
      d = get_le<std::uint64_t>(in, path);
    std::vector<double> values(shape_numel(shape));
    for (auto& v : values)
      v = std::bit_cast<double>(get_le<std::uint64_t>(in, path));
    e.tensor = Tensor(std::move(shape), std::move(values));
    ckpt.entries.push_back(std::move(e));
  }
  return ckpt;
}

namespace {

void store_params(Checkpoint& ckpt, const std::vector<NamedParam>& params) {
  for (const auto& p : params)
    ckpt.put(p.name, p.var.value());
}

void restore_params(const Checkpoint& ckpt, const std::vector<NamedParam>& params) {
  for (const auto& p : params) {
    const Tensor& t = ckpt.get(p.name);
    if (t.shape() != p.var.shape())
      throw DataError("checkpoint entry '" + p.name + "' has shape " + shape_string(t.shape()) +
                      ", expected " + shape_string(p.var.shape()));
    ag::Var v = p.var;
    v.mutable_value() = t;
  }
}

void expect_kind(const Checkpoint& ckpt, const char* kind) {
  if (ckpt.kind != kind)
    throw DataError(std::string("expected a ") + kind + " checkpoint, found '" + ckpt.kind + "'");
}

} // namespace

Checkpoint to_checkpoint(const GeneratorNet& net) {
  Checkpoint c{"generator", {}};
  c.put_scalar("meta.side", static_cast<double>(net.side()));
  c.put_scalar("meta.latent_dim", static_cast<double>(net.latent_dim()));
  c.put_scalar("meta.channels", static_cast<double>(net.channels()));
  store_params(c, net.parameters());
  return c;
}

Checkpoint to_checkpoint(const DiscriminatorNet& net) {
  Checkpoint c{"discriminator", {}};
  c.put_scalar("meta.side", static_cast<double>(net.side()));
  c.put_scalar("meta.channels", static_cast<double>(net.channels()));
  store_params(c, net.parameters());
  return c;
}

GeneratorNet generator_from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "generator");
  std::mt19937_64 unused(0);
  GeneratorNet net(static_cast<std::size_t>(ckpt.scalar("meta.side")),
                   static_cast<std::size_t>(ckpt.scalar("meta.latent_dim")), Init::zeros, unused,
                   static_cast<std::size_t>(ckpt.scalar("meta.channels")));
  restore_params(ckpt, net.parameters());
  return net;
}

DiscriminatorNet discriminator_from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "discriminator");
  std::mt19937_64 unused(0);
  DiscriminatorNet net(static_cast<std::size_t>(ckpt.scalar("meta.side")), Init::zeros, unused,
                       static_cast<std::size_t>(ckpt.scalar("meta.channels")));
  restore_params(ckpt, net.parameters());
  return net;
}

} // namespace skyaug
