#include "skyaug/adam.hpp"

#include <cmath>

#include "skyaug/error.hpp"

namespace skyaug {

void adam_step(AdamState& state, const std::vector<NamedParam>& params) {
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.var.shape(), 0.0);
      state.second_moment.emplace_back(p.var.shape(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size())
    throw UsageError("adam_step: optimizer state tracks " +
                     std::to_string(state.first_moment.size()) + " parameters, given " +
                     std::to_string(params.size()));

  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    ag::Var v = params[k].var;
    Tensor& value = v.mutable_value();
    const Tensor& grad = v.grad();
    Tensor& m = state.first_moment[k];
    Tensor& s = state.second_moment[k];
    if (m.shape() != value.shape())
      throw UsageError("adam_step: moment shape mismatch for " + params[k].name);
    for (std::size_t i = 0; i < value.numel(); ++i) {
      const double g = grad[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      s[i] = c.beta2 * s[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double s_hat = s[i] / correction2;
      value[i] -= c.learning_rate * m_hat / (std::sqrt(s_hat) + c.epsilon);
    }
  }
}

} // namespace skyaug
