// src/analysis/probe.h
//
// Token-level linear modality probe: a logistic classifier trained by
// gradient descent on encoder output tokens, reported as TPR (audio tokens
// identified correctly) and TNR (text tokens identified correctly) on a
// held-out split.

#pragma once

#include <cstdint>
#include <vector>

#include "analysis/linalg.h"

namespace zs::analysis {

struct ProbeOptions {
  double train_fraction = 0.7;
  int iterations = 400;
  double learning_rate = 0.5;
  double l2 = 1e-4;
};

struct ProbeResult {
  double tpr_pct = 0.0;
  double tnr_pct = 0.0;
  int64_t train_count = 0;
  int64_t test_count = 0;
};

// states: one row per token; labels: 1 = audio (positive), 0 = text.
ProbeResult modality_probe(const Mat& states,
                           const std::vector<uint8_t>& labels, uint64_t seed,
                           const ProbeOptions& opts = {});

}  // namespace zs::analysis
