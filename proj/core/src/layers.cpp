#include "skyaug/layers.hpp"

namespace skyaug {

namespace {

ag::Var make_param(Shape shape, Init init, double stddev, std::mt19937_64& rng,
                   std::string label) {
  Tensor t(std::move(shape), 0.0);
  if (init == Init::normal) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : t.values())
      v = dist(rng);
  }
  return ag::Var::leaf(std::move(t), true, std::move(label));
}

ag::Var make_bias(std::size_t n, std::string label) {
  return ag::Var::leaf(Tensor({n}, 0.0), true, std::move(label));
}

constexpr double kInitStd = 0.02;

} // namespace

Dense::Dense(std::string name, std::size_t in, std::size_t out, Init init, std::mt19937_64& rng)
    : name_(std::move(name)),
      weight_(make_param({in, out}, init, kInitStd, rng, name_ + ".weight")),
      bias_(make_bias(out, name_ + ".bias")) {}

ag::Var Dense::operator()(const ag::Var& x) const { return ag::linear(x, weight_, bias_, name_); }

void Dense::collect(std::vector<NamedParam>& out) const {
  out.push_back({name_ + ".weight", weight_});
  out.push_back({name_ + ".bias", bias_});
}

Conv2d::Conv2d(std::string name, std::size_t in, std::size_t out, ag::ConvGeometry g, Init init,
               std::mt19937_64& rng)
    : name_(std::move(name)), geom_(g),
      weight_(make_param({out, in, g.kernel, g.kernel}, init, kInitStd, rng, name_ + ".weight")),
      bias_(make_bias(out, name_ + ".bias")) {}

ag::Var Conv2d::operator()(const ag::Var& x) const {
  return ag::conv2d(x, weight_, bias_, geom_, name_);
}

void Conv2d::collect(std::vector<NamedParam>& out) const {
  out.push_back({name_ + ".weight", weight_});
  out.push_back({name_ + ".bias", bias_});
}

ConvTranspose2d::ConvTranspose2d(std::string name, std::size_t in, std::size_t out,
                                 ag::ConvGeometry g, Init init, std::mt19937_64& rng)
    : name_(std::move(name)), geom_(g),
      weight_(make_param({in, out, g.kernel, g.kernel}, init, kInitStd, rng, name_ + ".weight")),
      bias_(make_bias(out, name_ + ".bias")) {}

ag::Var ConvTranspose2d::operator()(const ag::Var& x) const {
  return ag::conv_transpose2d(x, weight_, bias_, geom_, name_);
}

void ConvTranspose2d::collect(std::vector<NamedParam>& out) const {
  out.push_back({name_ + ".weight", weight_});
  out.push_back({name_ + ".bias", bias_});
}

void zero_grads(const std::vector<NamedParam>& params) {
  for (const auto& p : params) {
    ag::Var v = p.var;
    v.zero_grad();
  }
}

std::size_t parameter_count(const std::vector<NamedParam>& params) {
  std::size_t n = 0;
  for (const auto& p : params)
    n += p.var.value().numel();
  return n;
}

} // namespace skyaug
