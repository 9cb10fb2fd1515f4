#pragma once

#include <random>
#include <string>
#include <vector>

#include "skyaug/autograd.hpp"

namespace skyaug {

enum class Init {
  normal, ///< N(0, 0.02) weights, zero biases
  zeros,
};

struct NamedParam {
  std::string name;
  ag::Var var;
};

/// y = x W + b with W [in, out].
class Dense {
public:
  Dense() = default;
  Dense(std::string name, std::size_t in, std::size_t out, Init init, std::mt19937_64& rng);

  ag::Var operator()(const ag::Var& x) const;
  void collect(std::vector<NamedParam>& out) const;
  std::size_t in_features() const { return weight_.shape()[0]; }
  std::size_t out_features() const { return weight_.shape()[1]; }

private:
  std::string name_;
  ag::Var weight_, bias_;
};

/// Strided convolution, kernel [out, in, k, k].
class Conv2d {
public:
  Conv2d() = default;
  Conv2d(std::string name, std::size_t in, std::size_t out, ag::ConvGeometry g, Init init,
         std::mt19937_64& rng);

  ag::Var operator()(const ag::Var& x) const;
  void collect(std::vector<NamedParam>& out) const;

private:
  std::string name_;
  ag::ConvGeometry geom_;
  ag::Var weight_, bias_;
};

/// Transposed (fractionally strided) convolution, kernel [in, out, k, k].
class ConvTranspose2d {
public:
  ConvTranspose2d() = default;
  ConvTranspose2d(std::string name, std::size_t in, std::size_t out, ag::ConvGeometry g,
                  Init init, std::mt19937_64& rng);

  ag::Var operator()(const ag::Var& x) const;
  void collect(std::vector<NamedParam>& out) const;

private:
  std::string name_;
  ag::ConvGeometry geom_;
  ag::Var weight_, bias_;
};

/// Zeroes the accumulated gradient of every parameter.
void zero_grads(const std::vector<NamedParam>& params);
std::size_t parameter_count(const std::vector<NamedParam>& params);

} // namespace skyaug
