#include "train/adam.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace attnfc {

void AdamConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("adam: learning rate must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  if (epsilon <= 0.0) throw ConfigError("adam: epsilon must be positive");
}

AdamState AdamState::like(const std::vector<Tensor*>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Tensor* p : params) {
    std::vector<std::size_t> shape(p->shape().begin(), p->shape().end());
    s.m.push_back(Tensor::zeros(shape));
    s.v.push_back(Tensor::zeros(shape));
  }
  return s;
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state, const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters vs " +
                         std::to_string(grads.size()) + " gradients vs " +
                         std::to_string(state.m.size()) + " accumulators");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    if (!p.same_shape(g) || !p.same_shape(state.m[i])) {
      throw DimensionError("adam_step: tensor " + std::to_string(i) + " shape " + p.shape_str() +
                           " does not match gradient " + g.shape_str());
    }
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace attnfc
