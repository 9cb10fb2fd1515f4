#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "skyaug/autograd.hpp"
#include "skyaug/image.hpp"
#include "skyaug/imageio.hpp"
#include "skyaug/layers.hpp"

namespace skyaug::fixtures {

// Relative error floor: gradients smaller than this are compared absolutely.
inline constexpr double kGradFloor = 1e-6;

struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

// Compares reverse-mode gradients of the scalar built by `f` against central
// differences for every element of every leaf.
inline GradCheck grad_check(const std::vector<NamedParam>& leaves,
                            const std::function<ag::Var()>& f, double h = 1e-4) {
  for (const auto& p : leaves)
    p.var.node().grad = Tensor();
  ag::backward(f());
  GradCheck out;
  for (const auto& p : leaves) {
    const Tensor analytic = p.var.grad();
    Tensor& v = p.var.node().value;
    for (std::size_t i = 0; i < v.numel(); ++i) {
      const double keep = v[i];
      v[i] = keep + h;
      const double fp = f().value()[0];
      v[i] = keep - h;
      const double fm = f().value()[0];
      v[i] = keep;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic.numel() ? analytic[i] : 0.0;
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), kGradFloor});
      ++out.checked;
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = p.name + "[" + std::to_string(i) + "] analytic " + std::to_string(a) +
                    " numeric " + std::to_string(numeric);
      }
    }
  }
  return out;
}

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Tensor t(std::move(shape));
  for (auto& v : t.values())
    v = n(rng);
  return t;
}

inline ag::Var random_leaf(Shape shape, std::mt19937_64& rng, const std::string& label,
                           double sd = 1.0) {
  return ag::Var::leaf(random_tensor(std::move(shape), rng, sd), true, label);
}

// Replaces layer parameters with wider draws so the check is not dominated
// by the tiny N(0, 0.02) initialization.
inline void widen(const std::vector<NamedParam>& params, std::mt19937_64& rng, double sd = 0.5) {
  std::normal_distribution<double> n(0.0, sd);
  for (const auto& p : params)
    for (auto& v : p.var.node().value.values())
      v = n(rng);
}

// Scalar probe sum(out * r) with fixed random r, so every output element
// contributes a distinct upstream gradient.
inline ag::Var probe(const ag::Var& out, const Tensor& r) {
  return ag::sum(ag::mul(out, ag::Var::constant(r, "probe")));
}

inline RawImage random_image(std::size_t w, std::size_t h, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 255);
  RawImage img(w, h);
  for (auto& v : img.values())
    v = static_cast<std::uint8_t>(d(rng));
  return img;
}

inline BinaryMap random_map(std::size_t w, std::size_t h, std::mt19937_64& rng, double p = 0.5) {
  std::bernoulli_distribution d(p);
  BinaryMap m(w, h);
  for (auto& v : m.values())
    v = d(rng) ? 1 : 0;
  return m;
}

struct SplitItems {
  std::vector<LabeledImage> train, val, test;
};

inline SplitItems synthetic_split(std::size_t count, std::size_t side, std::uint64_t seed,
                                  std::uint64_t split_seed) {
  auto items = synth_dataset(count, side, seed);
  const auto split = split_dataset(items.size(), split_seed);
  SplitItems s;
  for (auto i : split.train_ids)
    s.train.push_back(items[i]);
  for (auto i : split.val_ids)
    s.val.push_back(items[i]);
  for (auto i : split.test_ids)
    s.test.push_back(items[i]);
  return s;
}

} // namespace skyaug::fixtures
