// src/analysis/probe.cc

#include "analysis/probe.h"

#include <algorithm>
#include <cmath>

#include "core/error.h"
#include "core/rng.h"

namespace zs::analysis {

ProbeResult modality_probe(const Mat& states,
                           const std::vector<uint8_t>& labels, uint64_t seed,
                           const ProbeOptions& opts) {
  const int64_t n = states.rows;
  const int64_t d = states.cols;
  if (static_cast<int64_t>(labels.size()) != n)
    throw ArgumentError("modality_probe: label count mismatch");
  int64_t positives = 0;
  for (uint8_t l : labels) positives += (l != 0);
  if (positives == 0 || positives == n)
    throw ArgumentError("modality_probe: both classes are required");

  core::Rng rng = core::Rng(seed).child("probe");
  std::vector<int64_t> idx(n);
  for (int64_t i = 0; i < n; ++i) idx[i] = i;
  for (int64_t i = n; i > 1; --i)
    std::swap(idx[i - 1], idx[rng.uniform_int(0, i - 1)]);
  const int64_t n_train =
      std::max<int64_t>(1, static_cast<int64_t>(opts.train_fraction * n));
  if (n_train >= n)
    throw ArgumentError("modality_probe: empty held-out split");

  // Per-dimension standardization from the training split.
  std::vector<double> mean(d, 0.0), std(d, 0.0);
  for (int64_t t = 0; t < n_train; ++t)
    for (int64_t j = 0; j < d; ++j) mean[j] += states.at(idx[t], j);
  for (double& m : mean) m /= static_cast<double>(n_train);
  for (int64_t t = 0; t < n_train; ++t)
    for (int64_t j = 0; j < d; ++j) {
      const double c = states.at(idx[t], j) - mean[j];
      std[j] += c * c;
    }
  for (double& s : std) s = std::sqrt(s / static_cast<double>(n_train)) + 1e-8;

  auto feature = [&](int64_t row, int64_t j) {
    return (states.at(row, j) - mean[j]) / std[j];
  };

  std::vector<double> w(d, 0.0);
  double b = 0.0;
  for (int it = 0; it < opts.iterations; ++it) {
    std::vector<double> gw(d, 0.0);
    double gb = 0.0;
    for (int64_t t = 0; t < n_train; ++t) {
      const int64_t row = idx[t];
      double z = b;
      for (int64_t j = 0; j < d; ++j) z += w[j] * feature(row, j);
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double err = p - (labels[row] ? 1.0 : 0.0);
      for (int64_t j = 0; j < d; ++j) gw[j] += err * feature(row, j);
      gb += err;
    }
    const double inv = 1.0 / static_cast<double>(n_train);
    for (int64_t j = 0; j < d; ++j)
      w[j] -= opts.learning_rate * (gw[j] * inv + opts.l2 * w[j]);
    b -= opts.learning_rate * gb * inv;
  }

  int64_t tp = 0, fn = 0, tn = 0, fp = 0;
  for (int64_t t = n_train; t < n; ++t) {
    const int64_t row = idx[t];
    double z = b;
    for (int64_t j = 0; j < d; ++j) z += w[j] * feature(row, j);
    const bool predicted_audio = z > 0.0;
    if (labels[row]) {
      predicted_audio ? ++tp : ++fn;
    } else {
      predicted_audio ? ++fp : ++tn;
    }
  }
  if (tp + fn == 0 || tn + fp == 0)
    throw ArgumentError(
        "modality_probe: held-out split lacks one class; provide more tokens");

  ProbeResult result;
  result.train_count = n_train;
  result.test_count = n - n_train;
  result.tpr_pct = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
  result.tnr_pct = 100.0 * static_cast<double>(tn) / static_cast<double>(tn + fp);
  return result;
}

}  // namespace zs::analysis
