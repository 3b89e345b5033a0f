#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dhnet/nn/tensor.hpp"

namespace dhnet::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam. Moments are allocated on the first step and bound to
// the parameter order given then.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Throws TrainingAbort (before touching any parameter) if a gradient entry
  // is not finite.
  void step(std::span<Parameter* const> params);

  std::int64_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::int64_t steps_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace dhnet::nn
