// src/core/adam.h
//
// Adam with the inverse-square-root warmup schedule:
//   lr(s) = base_factor * model_dim^-0.5 * min(s^-0.5, s * warmup^-1.5)

#pragma once

#include <cstdint>
#include <vector>

#include "core/tensor.h"

namespace zs::core {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double base_factor = 0.01;
  int64_t warmup_steps = 8000;
  int64_t model_dim = 512;
};

double noam_rate(const AdamConfig& cfg, int64_t step);

class AdamState {
 public:
  AdamState(AdamConfig cfg, const std::vector<Tensor>& params);

  // One update over all parameters, reading their current gradients.
  // Increments the step counter first, so the first update uses lr(1).
  void step_update(std::vector<Tensor>& params);

  int64_t step() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

  // Raw moment access for checkpointing.
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void set_step(int64_t s) { step_ = s; }

 private:
  AdamConfig cfg_;
  int64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace zs::core
