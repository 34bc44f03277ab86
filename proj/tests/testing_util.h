// tests/testing_util.h
//
// Shared helpers for the test suites: central finite differences against
// analytic gradients, plus small tensor builders.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "core/rng.h"
#include "core/tensor.h"

namespace zs::testing {

inline double rel_err(double a, double b) {
  const double denom = std::max({1e-6, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) / denom;
}

// Checks d(loss)/d(param) against central finite differences for every
// coordinate of `param`. `forward` must rebuild the graph and return the
// scalar loss value. `analytic` is the gradient recorded by backward().
// Returns the max relative error.
inline double finite_diff_max_err(core::Tensor& param,
                                  const std::function<double()>& forward,
                                  const std::vector<double>& analytic,
                                  double h = 1e-5) {
  double worst = 0.0;
  auto& vals = param.values();
  for (size_t i = 0; i < vals.size(); ++i) {
    const double saved = vals[i];
    vals[i] = saved + h;
    const double fp = forward();
    vals[i] = saved - h;
    const double fm = forward();
    vals[i] = saved;
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, rel_err(fd, analytic[i]));
  }
  return worst;
}

// Same check over a seeded sample of coordinates (for big parameters).
inline double finite_diff_sampled_err(core::Tensor& param,
                                      const std::function<double()>& forward,
                                      const std::vector<double>& analytic,
                                      int n_coords, core::Rng& rng,
                                      double h = 1e-5) {
  double worst = 0.0;
  auto& vals = param.values();
  for (int k = 0; k < n_coords; ++k) {
    const size_t i = static_cast<size_t>(
        rng.uniform_int(0, static_cast<int64_t>(vals.size()) - 1));
    const double saved = vals[i];
    vals[i] = saved + h;
    const double fp = forward();
    vals[i] = saved - h;
    const double fm = forward();
    vals[i] = saved;
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, rel_err(fd, analytic[i]));
  }
  return worst;
}

inline core::Tensor random_tensor(core::Shape shape, core::Rng& rng,
                                  bool requires_grad = true,
                                  double scale = 1.0) {
  auto t = core::Tensor::zeros(std::move(shape), requires_grad);
  for (auto& v : t.values()) v = rng.normal(0.0, scale);
  return t;
}

}  // namespace zs::testing
