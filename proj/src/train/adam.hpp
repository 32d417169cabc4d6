#pragma once

#include <cstdint>
#include <vector>

#include "core/tensor.hpp"

namespace attnfc {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<Tensor> m, v;  // first/second moment accumulators, one per tensor
  std::uint64_t t = 0;

  static AdamState like(const std::vector<Tensor*>& params);
};

// One bias-corrected Adam update over all parameter tensors in place:
// m <- b1*m + (1-b1)*g, v <- b2*v + (1-b2)*g^2, p <- p - lr*m_hat/(sqrt(v_hat)+eps).
void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state, const AdamConfig& config);

}  // namespace attnfc
