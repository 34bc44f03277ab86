// src/analysis/svcca.cc

#include "analysis/svcca.h"

#include <algorithm>
#include <cmath>

#include "core/error.h"

namespace zs::analysis {

namespace {

void center_columns(Mat& m) {
  for (int64_t j = 0; j < m.cols; ++j) {
    double mean = 0;
    for (int64_t i = 0; i < m.rows; ++i) mean += m.at(i, j);
    mean /= static_cast<double>(m.rows);
    for (int64_t i = 0; i < m.rows; ++i) m.at(i, j) -= mean;
  }
}

// Top singular components covering `variance_kept` of total variance,
// represented with unit column variance: sqrt(n-1) * U_k.
Mat truncate_view(const Mat& centered, double variance_kept) {
  Svd s = svd(centered);
  double total = 0;
  for (double sg : s.sigma) total += sg * sg;
  if (total <= 0)
    throw ArgumentError("svcca: a view has zero variance");
  const double cutoff = 1e-12 * s.sigma[0];
  int64_t k = 0;
  double covered = 0;
  while (k < static_cast<int64_t>(s.sigma.size()) && s.sigma[k] > cutoff) {
    covered += s.sigma[k] * s.sigma[k];
    ++k;
    if (covered >= variance_kept * total) break;
  }
  // CCA needs strictly more samples than kept directions; at k = n - 1 the
  // whitened views correlate spuriously.
  if (centered.rows <= k + 1)
    throw ArgumentError(
        "svcca: ill-conditioned, " + std::to_string(centered.rows) +
        " samples for " + std::to_string(k) +
        " kept components; provide more samples");
  Mat out(centered.rows, k);
  const double scale = std::sqrt(static_cast<double>(centered.rows - 1));
  for (int64_t i = 0; i < centered.rows; ++i)
    for (int64_t j = 0; j < k; ++j) out.at(i, j) = s.u.at(i, j) * scale;
  return out;
}

Mat covariance(const Mat& a, const Mat& b) {
  Mat c = matmul(transpose(a), b);
  for (double& v : c.v) v /= static_cast<double>(a.rows - 1);
  return c;
}

}  // namespace

double svcca(const Mat& x, const Mat& y, const SvccaOptions& opts) {
  if (x.rows != y.rows)
    throw ArgumentError("svcca: row counts disagree (" +
                        std::to_string(x.rows) + " vs " +
                        std::to_string(y.rows) + ")");
  if (x.rows < 3) throw ArgumentError("svcca: need at least 3 samples");
  if (opts.variance_kept <= 0 || opts.variance_kept > 1)
    throw ArgumentError("svcca: variance_kept must be in (0, 1]");

  Mat xc = x, yc = y;
  center_columns(xc);
  center_columns(yc);
  Mat xt = truncate_view(xc, opts.variance_kept);
  Mat yt = truncate_view(yc, opts.variance_kept);

  Mat cxx = covariance(xt, xt);
  Mat cyy = covariance(yt, yt);
  Mat cxy = covariance(xt, yt);
  for (int64_t i = 0; i < cxx.rows; ++i) cxx.at(i, i) += opts.ridge;
  for (int64_t i = 0; i < cyy.rows; ++i) cyy.at(i, i) += opts.ridge;

  Mat m = matmul(sym_inv_sqrt(cxx), matmul(cxy, sym_inv_sqrt(cyy)));
  Svd s = svd(m);
  const int64_t k = std::min(xt.cols, yt.cols);
  double sum = 0;
  for (int64_t i = 0; i < k; ++i)
    sum += std::clamp(s.sigma[i], 0.0, 1.0);
  return sum / static_cast<double>(k);
}

}  // namespace zs::analysis
