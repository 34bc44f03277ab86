// src/core/adam.cc

#include "core/adam.h"

#include <cmath>

#include "core/error.h"

namespace zs::core {

double noam_rate(const AdamConfig& cfg, int64_t step) {
  if (step < 1) throw ArgumentError("noam_rate: step must be >= 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(cfg.warmup_steps);
  return cfg.base_factor / std::sqrt(static_cast<double>(cfg.model_dim)) *
         std::min(1.0 / std::sqrt(s), s / (w * std::sqrt(w)));
}

AdamState::AdamState(AdamConfig cfg, const std::vector<Tensor>& params)
    : cfg_(cfg) {
  if (cfg.warmup_steps < 1)
    throw ArgumentError("adam: warmup_steps must be positive");
  if (cfg.model_dim < 1) throw ArgumentError("adam: model_dim must be positive");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void AdamState::step_update(std::vector<Tensor>& params) {
  if (params.size() != m_.size())
    throw ContractError("adam: parameter count changed since construction");
  ++step_;
  const double lr = noam_rate(cfg_, step_);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    auto& vals = params[i].values();
    const auto& grad = params[i].grad();
    auto& m = m_[i];
    auto& v = v_[i];
    if (m.size() != vals.size())
      throw ContractError("adam: moment buffer shape disagrees with parameter");
    for (size_t j = 0; j < vals.size(); ++j) {
      const double g = grad[j];
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      vals[j] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace zs::core
