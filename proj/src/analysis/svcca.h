// src/analysis/svcca.h
//
// Singular vector canonical correlation analysis over two row-aligned state
// matrices: center, SVD-truncate each view to the components explaining
// `variance_kept` of total variance, whiten, and take the mean of the
// canonical correlations of the cross-covariance.

#pragma once

#include "analysis/linalg.h"

namespace zs::analysis {

struct SvccaOptions {
  double variance_kept = 0.99;
  double ridge = 1e-6;  // added to the whitening covariances
};

double svcca(const Mat& x, const Mat& y, const SvccaOptions& opts = {});

}  // namespace zs::analysis
