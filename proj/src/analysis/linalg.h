// src/analysis/linalg.h
//
// Small dense-matrix numerics for the representation analyses: one-sided
// Jacobi SVD and a cyclic Jacobi symmetric eigensolver. Dimensions here are
// tiny (tens of columns), so simplicity and robustness win over speed.

#pragma once

#include <cstdint>
#include <vector>

namespace zs::analysis {

struct Mat {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> v;  // row-major

  Mat() = default;
  Mat(int64_t r, int64_t c) : rows(r), cols(c), v(r * c, 0.0) {}

  double& at(int64_t i, int64_t j) { return v[i * cols + j]; }
  double at(int64_t i, int64_t j) const { return v[i * cols + j]; }
  static Mat identity(int64_t n);
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);

struct Svd {
  Mat u;                      // m x k
  std::vector<double> sigma;  // descending
  Mat v;                      // n x k
};

// Thin SVD, k = min(rows, cols).
Svd svd(const Mat& a);

struct SymEig {
  Mat q;                  // columns are eigenvectors
  std::vector<double> w;  // descending
};

SymEig sym_eig(const Mat& a);

// Inverse square root of a symmetric PSD matrix; eigenvalues below `floor`
// are clamped to it.
Mat sym_inv_sqrt(const Mat& a, double floor_value = 1e-12);

}  // namespace zs::analysis
