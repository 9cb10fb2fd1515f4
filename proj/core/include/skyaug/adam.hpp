#pragma once

#include <cstdint>
#include <vector>

#include "skyaug/layers.hpp"

namespace skyaug {

struct AdamConfig {
  double learning_rate = 0.00025;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected moments. Moment buffers are created on the
/// first step to match the parameter shapes.
struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
};

/// One update of every parameter in `params` from its accumulated grad.
void adam_step(AdamState& state, const std::vector<NamedParam>& params);

} // namespace skyaug
