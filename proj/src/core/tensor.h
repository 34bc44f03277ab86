// src/core/tensor.h
//
// Minimal dense tensor with reverse-mode automatic differentiation.
//
// A Tensor is a cheap handle onto a shared node. Ops build a dynamic graph;
// backward(loss) runs reverse topological order from a scalar loss and
// accumulates gradients into every reachable tensor that requires them.
// Training arithmetic is double precision throughout; checkpoints narrow
// to float on disk.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "core/error.h"
#include "core/rng.h"

namespace zs::core {

using Shape = std::vector<int64_t>;

int64_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorNode;

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor constant(Shape shape, double value);
  static Tensor from_values(Shape shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int rank() const;
  int64_t dim(int axis) const;
  int64_t size() const;
  int64_t rows() const { return dim(0); }
  int64_t cols() const { return dim(1); }

  std::vector<double>& values();
  const std::vector<double>& values() const;
  double item() const;  // scalar tensors only
  double at(int64_t i) const;
  double at(int64_t i, int64_t j) const;
  void set(int64_t i, double v);
  void set(int64_t i, int64_t j, double v);

  bool requires_grad() const;
  void set_requires_grad(bool on);
  // Gradient buffer, zero-filled on first access.
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void zero_grad();

  // Identity of the underlying node (used by the backward pass and tests).
  const std::shared_ptr<TensorNode>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<TensorNode> node_;

  friend Tensor make_op_result(Shape shape, std::vector<double> values,
                               std::vector<Tensor> parents,
                               std::function<void(TensorNode&)> backprop,
                               const char* op_name);
};

struct TensorNode {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // allocated lazily, same length as values
  bool requires_grad = false;
  // Parents and backprop are populated only when the op result participates
  // in gradient computation.
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backprop;
  const char* op_name = "leaf";

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

// When false, ops do not record graph edges (inference / decoding).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};
bool grad_enabled();

// ---------------------------------------------------------------------------
// Ops. All check shapes and reject non-finite results.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
// rows of m plus a length-cols vector (bias broadcast).
Tensor add_rowvec(const Tensor& m, const Tensor& v);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double c);
Tensor relu(const Tensor& a);
Tensor transpose(const Tensor& a);  // 2-D

// Stable softmax along `axis` (0 or 1 for 2-D, 0 for 1-D).
Tensor softmax(const Tensor& x, int axis);

// Normalizes the last axis to zero mean / unit variance, then applies
// gain/bias (both length = last dim).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps);

// Gathers rows of `table` (V x d) by id; backward scatter-adds.
Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids);

Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor slice_rows(const Tensor& x, int64_t begin, int64_t count);
Tensor slice_cols(const Tensor& x, int64_t begin, int64_t count);

// Mean over rows whose mask byte is nonzero; result is a 1 x d matrix.
Tensor masked_mean_rows(const Tensor& x, const std::vector<uint8_t>& keep);

Tensor mean_all(const Tensor& x);  // scalar
Tensor sum_all(const Tensor& x);   // scalar

// Mean over non-pad positions of the label-smoothed negative log-likelihood.
// logits: L x V; targets: length L token ids; positions with target == pad_id
// are excluded. The smoothed target distribution puts (1 - smoothing) on the
// gold token and smoothing / (V - 1) on every other class.
Tensor cross_entropy_label_smoothed(const Tensor& logits,
                                    const std::vector<int>& targets,
                                    double smoothing, int pad_id);

// Inverted-dropout mask. rate == 0 is the identity (no graph node). When
// whole_rows is set, entire rows are zeroed together (word dropout).
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool whole_rows = false);

// Reverse-mode pass from a scalar loss. Clears gradients of every reachable
// node first, then accumulates; gradients of multiple uses sum.
void backward(const Tensor& loss);

}  // namespace zs::core
