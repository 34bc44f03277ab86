// src/analysis/linalg.cc

#include "analysis/linalg.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.h"

namespace zs::analysis {

Mat Mat::identity(int64_t n) {
  Mat m(n, n);
  for (int64_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw ShapeError("linalg matmul: inner dims disagree");
  Mat c(a.rows, b.cols);
  for (int64_t i = 0; i < a.rows; ++i)
    for (int64_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (int64_t j = 0; j < b.cols; ++j) c.at(i, j) += aik * b.at(k, j);
    }
  return c;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols, a.rows);
  for (int64_t i = 0; i < a.rows; ++i)
    for (int64_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

namespace {

// One-sided Jacobi on the columns of B (rows >= cols expected); returns the
// accumulated right rotations in V.
void one_sided_jacobi(Mat& b, Mat& v) {
  const int64_t n = b.cols;
  const int64_t m = b.rows;
  constexpr double kTol = 1e-13;
  constexpr int kMaxSweeps = 60;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (int64_t p = 0; p + 1 < n; ++p) {
      for (int64_t q = p + 1; q < n; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (int64_t i = 0; i < m; ++i) {
          const double bp = b.at(i, p), bq = b.at(i, q);
          alpha += bp * bp;
          beta += bq * bq;
          gamma += bp * bq;
        }
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::fabs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int64_t i = 0; i < m; ++i) {
          const double bp = b.at(i, p), bq = b.at(i, q);
          b.at(i, p) = c * bp - s * bq;
          b.at(i, q) = s * bp + c * bq;
        }
        for (int64_t i = 0; i < n; ++i) {
          const double vp = v.at(i, p), vq = v.at(i, q);
          v.at(i, p) = c * vp - s * vq;
          v.at(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
}

}  // namespace

Svd svd(const Mat& a) {
  if (a.rows == 0 || a.cols == 0) throw ArgumentError("svd: empty matrix");
  if (a.rows < a.cols) {
    // Work on the transpose and swap the factors back.
    Svd t = svd(transpose(a));
    return Svd{t.v, t.sigma, t.u};
  }
  Mat b = a;
  Mat v = Mat::identity(a.cols);
  one_sided_jacobi(b, v);

  const int64_t k = a.cols;
  std::vector<double> sigma(k);
  for (int64_t j = 0; j < k; ++j) {
    double s = 0;
    for (int64_t i = 0; i < b.rows; ++i) s += b.at(i, j) * b.at(i, j);
    sigma[j] = std::sqrt(s);
  }
  std::vector<int64_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int64_t x, int64_t y) { return sigma[x] > sigma[y]; });

  Svd out;
  out.sigma.resize(k);
  out.u = Mat(a.rows, k);
  out.v = Mat(a.cols, k);
  for (int64_t jj = 0; jj < k; ++jj) {
    const int64_t j = order[jj];
    out.sigma[jj] = sigma[j];
    if (sigma[j] > 0) {
      for (int64_t i = 0; i < a.rows; ++i)
        out.u.at(i, jj) = b.at(i, j) / sigma[j];
    }
    for (int64_t i = 0; i < a.cols; ++i) out.v.at(i, jj) = v.at(i, j);
  }
  return out;
}

SymEig sym_eig(const Mat& a) {
  if (a.rows != a.cols) throw ShapeError("sym_eig: matrix not square");
  const int64_t n = a.rows;
  Mat m = a;
  Mat q = Mat::identity(n);
  // Threshold compares squared sums, so 1e-26 keeps off-diagonal elements
  // near 1e-13 of the diagonal scale.
  constexpr double kTol = 1e-26;
  constexpr int kMaxSweeps = 80;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0;
    for (int64_t p = 0; p < n; ++p)
      for (int64_t r = p + 1; r < n; ++r) off += m.at(p, r) * m.at(p, r);
    double diag = 0;
    for (int64_t p = 0; p < n; ++p) diag += m.at(p, p) * m.at(p, p);
    if (off <= kTol * std::max(diag, 1e-300)) break;
    for (int64_t p = 0; p + 1 < n; ++p) {
      for (int64_t r = p + 1; r < n; ++r) {
        const double apq = m.at(p, r);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (m.at(r, r) - m.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int64_t i = 0; i < n; ++i) {
          const double aip = m.at(i, p), aiq = m.at(i, r);
          m.at(i, p) = c * aip - s * aiq;
          m.at(i, r) = s * aip + c * aiq;
        }
        for (int64_t i = 0; i < n; ++i) {
          const double api = m.at(p, i), aqi = m.at(r, i);
          m.at(p, i) = c * api - s * aqi;
          m.at(r, i) = s * api + c * aqi;
        }
        for (int64_t i = 0; i < n; ++i) {
          const double qip = q.at(i, p), qiq = q.at(i, r);
          q.at(i, p) = c * qip - s * qiq;
          q.at(i, r) = s * qip + c * qiq;
        }
      }
    }
  }
  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int64_t x, int64_t y) { return m.at(x, x) > m.at(y, y); });
  SymEig out;
  out.w.resize(n);
  out.q = Mat(n, n);
  for (int64_t jj = 0; jj < n; ++jj) {
    out.w[jj] = m.at(order[jj], order[jj]);
    for (int64_t i = 0; i < n; ++i) out.q.at(i, jj) = q.at(i, order[jj]);
  }
  return out;
}

Mat sym_inv_sqrt(const Mat& a, double floor_value) {
  SymEig eig = sym_eig(a);
  const int64_t n = a.rows;
  Mat scaled(n, n);
  for (int64_t j = 0; j < n; ++j) {
    const double w = std::max(eig.w[j], floor_value);
    const double f = 1.0 / std::sqrt(w);
    for (int64_t i = 0; i < n; ++i) scaled.at(i, j) = eig.q.at(i, j) * f;
  }
  return matmul(scaled, transpose(eig.q));
}

}  // namespace zs::analysis
