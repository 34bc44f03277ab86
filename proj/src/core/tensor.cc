// src/core/tensor.cc

#include "core/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace zs::core {

namespace {

thread_local bool g_grad_enabled = true;

void check_axis(const Tensor& t, int axis) {
  if (axis < 0 || axis >= t.rank())
    throw ArgumentError("softmax: axis " + std::to_string(axis) +
                        " invalid for rank " + std::to_string(t.rank()));
}

void check_finite(const char* op, const std::vector<double>& v) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]))
      throw NumericError(std::string(op) + ": non-finite value at flat index " +
                         std::to_string(i));
  }
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

}  // namespace

int64_t shape_size(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0) throw ShapeError("non-positive dimension in " + shape_str(shape));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << "]";
  return os.str();
}

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }
bool grad_enabled() { return g_grad_enabled; }

// ---------------------------------------------------------------------------
// Tensor basics

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto node = std::make_shared<TensorNode>();
  node->values.assign(shape_size(shape), 0.0);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::constant(Shape shape, double value) {
  Tensor t = zeros(std::move(shape), false);
  std::fill(t.values().begin(), t.values().end(), value);
  return t;
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values,
                           bool requires_grad) {
  if (static_cast<int64_t>(values.size()) != shape_size(shape))
    throw ShapeError("from_values: " + std::to_string(values.size()) +
                     " values for shape " + shape_str(shape));
  check_finite("from_values", values);
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value) { return from_values({1}, {value}); }

const Shape& Tensor::shape() const { return node_->shape; }
int Tensor::rank() const { return static_cast<int>(node_->shape.size()); }

int64_t Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank())
    throw ArgumentError("dim: axis out of range");
  return node_->shape[axis];
}

int64_t Tensor::size() const { return static_cast<int64_t>(node_->values.size()); }

std::vector<double>& Tensor::values() { return node_->values; }
const std::vector<double>& Tensor::values() const { return node_->values; }

double Tensor::item() const {
  if (size() != 1) throw ContractError("item: tensor is not scalar");
  return node_->values[0];
}

double Tensor::at(int64_t i) const { return node_->values.at(i); }
double Tensor::at(int64_t i, int64_t j) const {
  return node_->values.at(i * cols() + j);
}
void Tensor::set(int64_t i, double v) { node_->values.at(i) = v; }
void Tensor::set(int64_t i, int64_t j, double v) {
  node_->values.at(i * cols() + j) = v;
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
void Tensor::set_requires_grad(bool on) { node_->requires_grad = on; }

std::vector<double>& Tensor::grad() {
  node_->ensure_grad();
  return node_->grad;
}
const std::vector<double>& Tensor::grad() const {
  node_->ensure_grad();
  return node_->grad;
}
void Tensor::zero_grad() {
  node_->ensure_grad();
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Op plumbing

Tensor make_op_result(Shape shape, std::vector<double> values,
                      std::vector<Tensor> parents,
                      std::function<void(TensorNode&)> backprop,
                      const char* op_name) {
  check_finite(op_name, values);
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->op_name = op_name;
  bool track = false;
  if (g_grad_enabled) {
    for (const auto& p : parents)
      if (p.defined() && p.requires_grad()) track = true;
  }
  if (track) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (const auto& p : parents) node->parents.push_back(p.node());
    node->backprop = std::move(backprop);
  }
  return Tensor(std::move(node));
}

namespace {

// Convenience for backprop lambdas.
std::vector<double>& grad_of(const std::shared_ptr<TensorNode>& n) {
  n->ensure_grad();
  return n->grad;
}

}  // namespace

// ---------------------------------------------------------------------------
// Ops

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw ShapeError("matmul: operands must be 2-D, got " +
                     shape_str(a.shape()) + " and " + shape_str(b.shape()));
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions disagree, " +
                     shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const int64_t m = a.rows(), k = a.cols(), n = b.cols();
  const auto& av = a.values();
  const auto& bv = b.values();
  std::vector<double> out(m * n, 0.0);
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = av.data() + i * k;
    double* orow = out.data() + i * n;
    for (int64_t j = 0; j < k; ++j) {
      const double aij = arow[j];
      if (aij == 0.0) continue;
      const double* brow = bv.data() + j * n;
      for (int64_t c = 0; c < n; ++c) orow[c] += aij * brow[c];
    }
  }
  return make_op_result(
      {m, n}, std::move(out), {a, b},
      [m, k, n](TensorNode& node) {
        const auto& g = node.grad;
        auto& pa = node.parents[0];
        auto& pb = node.parents[1];
        const auto& av2 = pa->values;
        const auto& bv2 = pb->values;
        if (pa->requires_grad) {
          auto& ga = grad_of(pa);
          // dA = dC * B^T
          for (int64_t i = 0; i < m; ++i)
            for (int64_t j = 0; j < k; ++j) {
              double s = 0.0;
              const double* grow = g.data() + i * n;
              const double* brow = bv2.data() + j * n;
              for (int64_t c = 0; c < n; ++c) s += grow[c] * brow[c];
              ga[i * k + j] += s;
            }
        }
        if (pb->requires_grad) {
          auto& gb = grad_of(pb);
          // dB = A^T * dC
          for (int64_t i = 0; i < m; ++i) {
            const double* arow = av2.data() + i * k;
            const double* grow = g.data() + i * n;
            for (int64_t j = 0; j < k; ++j) {
              const double aij = arow[j];
              if (aij == 0.0) continue;
              double* gbrow = gb.data() + j * n;
              for (int64_t c = 0; c < n; ++c) gbrow[c] += aij * grow[c];
            }
          }
        }
      },
      "matmul");
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  std::vector<double> out(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return make_op_result(
      a.shape(), std::move(out), {a, b},
      [](TensorNode& node) {
        for (auto& p : node.parents) {
          if (!p->requires_grad) continue;
          auto& gp = grad_of(p);
          for (size_t i = 0; i < gp.size(); ++i) gp[i] += node.grad[i];
        }
      },
      "add");
}

Tensor add_rowvec(const Tensor& m, const Tensor& v) {
  if (m.rank() != 2 || v.rank() != 1 || v.dim(0) != m.cols())
    throw ShapeError("add_rowvec: " + shape_str(m.shape()) + " + " +
                     shape_str(v.shape()));
  const int64_t rows = m.rows(), cols = m.cols();
  std::vector<double> out(m.values());
  const auto& vv = v.values();
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j) out[i * cols + j] += vv[j];
  return make_op_result(
      m.shape(), std::move(out), {m, v},
      [rows, cols](TensorNode& node) {
        auto& pm = node.parents[0];
        auto& pv = node.parents[1];
        if (pm->requires_grad) {
          auto& gm = grad_of(pm);
          for (size_t i = 0; i < gm.size(); ++i) gm[i] += node.grad[i];
        }
        if (pv->requires_grad) {
          auto& gv = grad_of(pv);
          for (int64_t i = 0; i < rows; ++i)
            for (int64_t j = 0; j < cols; ++j) gv[j] += node.grad[i * cols + j];
        }
      },
      "add_rowvec");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape("sub", a, b);
  std::vector<double> out(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return make_op_result(
      a.shape(), std::move(out), {a, b},
      [](TensorNode& node) {
        auto& pa = node.parents[0];
        auto& pb = node.parents[1];
        if (pa->requires_grad) {
          auto& ga = grad_of(pa);
          for (size_t i = 0; i < ga.size(); ++i) ga[i] += node.grad[i];
        }
        if (pb->requires_grad) {
          auto& gb = grad_of(pb);
          for (size_t i = 0; i < gb.size(); ++i) gb[i] -= node.grad[i];
        }
      },
      "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  std::vector<double> out(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return make_op_result(
      a.shape(), std::move(out), {a, b},
      [](TensorNode& node) {
        auto& pa = node.parents[0];
        auto& pb = node.parents[1];
        if (pa->requires_grad) {
          auto& ga = grad_of(pa);
          for (size_t i = 0; i < ga.size(); ++i)
            ga[i] += node.grad[i] * pb->values[i];
        }
        if (pb->requires_grad) {
          auto& gb = grad_of(pb);
          for (size_t i = 0; i < gb.size(); ++i)
            gb[i] += node.grad[i] * pa->values[i];
        }
      },
      "mul");
}

Tensor scale(const Tensor& a, double c) {
  if (!std::isfinite(c)) throw NumericError("scale: non-finite factor");
  std::vector<double> out(a.values());
  for (double& x : out) x *= c;
  return make_op_result(
      a.shape(), std::move(out), {a},
      [c](TensorNode& node) {
        auto& pa = node.parents[0];
        if (!pa->requires_grad) return;
        auto& ga = grad_of(pa);
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += c * node.grad[i];
      },
      "scale");
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.values());
  for (double& x : out) x = x > 0.0 ? x : 0.0;
  return make_op_result(
      a.shape(), std::move(out), {a},
      [](TensorNode& node) {
        auto& pa = node.parents[0];
        if (!pa->requires_grad) return;
        auto& ga = grad_of(pa);
        for (size_t i = 0; i < ga.size(); ++i)
          if (pa->values[i] > 0.0) ga[i] += node.grad[i];
      },
      "relu");
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("transpose: expected 2-D tensor");
  const int64_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  const auto& av = a.values();
  for (int64_t i = 0; i < r; ++i)
    for (int64_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  return make_op_result(
      {c, r}, std::move(out), {a},
      [r, c](TensorNode& node) {
        auto& pa = node.parents[0];
        if (!pa->requires_grad) return;
        auto& ga = grad_of(pa);
        for (int64_t i = 0; i < r; ++i)
          for (int64_t j = 0; j < c; ++j) ga[i * c + j] += node.grad[j * r + i];
      },
      "transpose");
}

Tensor softmax(const Tensor& x, int axis) {
  check_axis(x, axis);
  if (x.rank() > 2) throw ArgumentError("softmax: rank > 2 unsupported");
  // Map to (groups, len, stride): elements of one softmax group are
  // base + t * stride for t in [0, len).
  int64_t groups, len, stride, group_stride;
  if (x.rank() == 1) {
    groups = 1, len = x.dim(0), stride = 1, group_stride = 0;
  } else if (axis == 1) {
    groups = x.rows(), len = x.cols(), stride = 1, group_stride = x.cols();
  } else {
    groups = x.cols(), len = x.rows(), stride = x.cols(), group_stride = 1;
  }
  std::vector<double> out(x.values().size());
  const auto& xv = x.values();
  for (int64_t g = 0; g < groups; ++g) {
    const int64_t base = g * group_stride;
    double mx = -std::numeric_limits<double>::infinity();
    for (int64_t t = 0; t < len; ++t) mx = std::max(mx, xv[base + t * stride]);
    double denom = 0.0;
    for (int64_t t = 0; t < len; ++t) {
      double e = std::exp(xv[base + t * stride] - mx);
      out[base + t * stride] = e;
      denom += e;
    }
    for (int64_t t = 0; t < len; ++t) out[base + t * stride] /= denom;
  }
  return make_op_result(
      x.shape(), std::move(out), {x},
      [groups, len, stride, group_stride](TensorNode& node) {
        auto& pa = node.parents[0];
        if (!pa->requires_grad) return;
        auto& ga = grad_of(pa);
        const auto& y = node.values;
        const auto& gy = node.grad;
        for (int64_t g = 0; g < groups; ++g) {
          const int64_t base = g * group_stride;
          double dot = 0.0;
          for (int64_t t = 0; t < len; ++t) {
            const int64_t i = base + t * stride;
            dot += gy[i] * y[i];
          }
          for (int64_t t = 0; t < len; ++t) {
            const int64_t i = base + t * stride;
            ga[i] += y[i] * (gy[i] - dot);
          }
        }
      },
      "softmax");
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  if (eps <= 0.0) throw ArgumentError("layer_norm: eps must be positive");
  const int64_t d = x.rank() == 1 ? x.dim(0) : x.cols();
  const int64_t rows = x.rank() == 1 ? 1 : x.rows();
  if (gain.rank() != 1 || bias.rank() != 1 || gain.dim(0) != d ||
      bias.dim(0) != d)
    throw ShapeError("layer_norm: gain/bias must be length " + std::to_string(d));
  const auto& xv = x.values();
  const auto& gv = gain.values();
  const auto& bv = bias.values();
  std::vector<double> out(xv.size());
  std::vector<double> xhat(xv.size());
  std::vector<double> inv_std(rows);
  for (int64_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * d;
    double mean = 0.0;
    for (int64_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (int64_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (int64_t j = 0; j < d; ++j) {
      const double h = (row[j] - mean) * is;
      xhat[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  return make_op_result(
      x.shape(), std::move(out), {x, gain, bias},
      [rows, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          TensorNode& node) {
        auto& px = node.parents[0];
        auto& pg = node.parents[1];
        auto& pb = node.parents[2];
        const auto& gy = node.grad;
        const auto& gv2 = pg->values;
        if (pg->requires_grad) {
          auto& gg = grad_of(pg);
          for (int64_t r = 0; r < rows; ++r)
            for (int64_t j = 0; j < d; ++j)
              gg[j] += gy[r * d + j] * xhat[r * d + j];
        }
        if (pb->requires_grad) {
          auto& gb = grad_of(pb);
          for (int64_t r = 0; r < rows; ++r)
            for (int64_t j = 0; j < d; ++j) gb[j] += gy[r * d + j];
        }
        if (px->requires_grad) {
          auto& gx = grad_of(px);
          const double dn = static_cast<double>(d);
          for (int64_t r = 0; r < rows; ++r) {
            // dxhat_j = dy_j * gain_j; dx = (dxhat - mean(dxhat)
            //           - xhat * mean(dxhat * xhat)) * inv_std
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (int64_t j = 0; j < d; ++j) {
              const double dxh = gy[r * d + j] * gv2[j];
              sum_dxhat += dxh;
              sum_dxhat_xhat += dxh * xhat[r * d + j];
            }
            for (int64_t j = 0; j < d; ++j) {
              const double dxh = gy[r * d + j] * gv2[j];
              gx[r * d + j] += (dxh - sum_dxhat / dn -
                                xhat[r * d + j] * sum_dxhat_xhat / dn) *
                               inv_std[r];
            }
          }
        }
      },
      "layer_norm");
}

Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids) {
  if (table.rank() != 2) throw ShapeError("embedding_rows: table must be 2-D");
  if (ids.empty()) throw ArgumentError("embedding_rows: empty id list");
  const int64_t v = table.rows(), d = table.cols();
  for (int id : ids)
    if (id < 0 || id >= v)
      throw IndexError("embedding_rows: id " + std::to_string(id) +
                       " outside vocabulary of size " + std::to_string(v));
  const int64_t n = static_cast<int64_t>(ids.size());
  std::vector<double> out(n * d);
  const auto& tv = table.values();
  for (int64_t i = 0; i < n; ++i)
    std::copy_n(tv.data() + static_cast<int64_t>(ids[i]) * d, d,
                out.data() + i * d);
  return make_op_result(
      {n, d}, std::move(out), {table},
      [ids, d](TensorNode& node) {
        auto& pt = node.parents[0];
        if (!pt->requires_grad) return;
        auto& gt = grad_of(pt);
        for (size_t i = 0; i < ids.size(); ++i) {
          double* dst = gt.data() + static_cast<int64_t>(ids[i]) * d;
          const double* src = node.grad.data() + static_cast<int64_t>(i) * d;
          for (int64_t j = 0; j < d; ++j) dst[j] += src[j];
        }
      },
      "embedding_rows");
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.cols())
    throw ShapeError("concat_rows: " + shape_str(a.shape()) + " with " +
                     shape_str(b.shape()));
  const int64_t ra = a.rows(), rb = b.rows(), c = a.cols();
  std::vector<double> out;
  out.reserve((ra + rb) * c);
  out.insert(out.end(), a.values().begin(), a.values().end());
  out.insert(out.end(), b.values().begin(), b.values().end());
  return make_op_result(
      {ra + rb, c}, std::move(out), {a, b},
      [ra, rb, c](TensorNode& node) {
        auto& pa = node.parents[0];
        auto& pb = node.parents[1];
        if (pa->requires_grad) {
          auto& ga = grad_of(pa);
          for (int64_t i = 0; i < ra * c; ++i) ga[i] += node.grad[i];
        }
        if (pb->requires_grad) {
          auto& gb = grad_of(pb);
          for (int64_t i = 0; i < rb * c; ++i) gb[i] += node.grad[ra * c + i];
        }
      },
      "concat_rows");
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.rows() != b.rows())
    throw ShapeError("concat_cols: " + shape_str(a.shape()) + " with " +
                     shape_str(b.shape()));
  const int64_t r = a.rows(), ca = a.cols(), cb = b.cols();
  std::vector<double> out(r * (ca + cb));
  for (int64_t i = 0; i < r; ++i) {
    std::copy_n(a.values().data() + i * ca, ca, out.data() + i * (ca + cb));
    std::copy_n(b.values().data() + i * cb, cb,
                out.data() + i * (ca + cb) + ca);
  }
  return make_op_result(
      {r, ca + cb}, std::move(out), {a, b},
      [r, ca, cb](TensorNode& node) {
        auto& pa = node.parents[0];
        auto& pb = node.parents[1];
        for (int64_t i = 0; i < r; ++i) {
          if (pa->requires_grad) {
            auto& ga = grad_of(pa);
            for (int64_t j = 0; j < ca; ++j)
              ga[i * ca + j] += node.grad[i * (ca + cb) + j];
          }
          if (pb->requires_grad) {
            auto& gb = grad_of(pb);
            for (int64_t j = 0; j < cb; ++j)
              gb[i * cb + j] += node.grad[i * (ca + cb) + ca + j];
          }
        }
      },
      "concat_cols");
}

Tensor slice_rows(const Tensor& x, int64_t begin, int64_t count) {
  if (x.rank() != 2) throw ShapeError("slice_rows: expected 2-D tensor");
  if (begin < 0 || count <= 0 || begin + count > x.rows())
    throw ArgumentError("slice_rows: range [" + std::to_string(begin) + ", " +
                        std::to_string(begin + count) + ") outside " +
                        std::to_string(x.rows()) + " rows");
  const int64_t c = x.cols();
  std::vector<double> out(x.values().begin() + begin * c,
                          x.values().begin() + (begin + count) * c);
  return make_op_result(
      {count, c}, std::move(out), {x},
      [begin, count, c](TensorNode& node) {
        auto& px = node.parents[0];
        if (!px->requires_grad) return;
        auto& gx = grad_of(px);
        for (int64_t i = 0; i < count * c; ++i)
          gx[begin * c + i] += node.grad[i];
      },
      "slice_rows");
}

Tensor slice_cols(const Tensor& x, int64_t begin, int64_t count) {
  if (x.rank() != 2) throw ShapeError("slice_cols: expected 2-D tensor");
  if (begin < 0 || count <= 0 || begin + count > x.cols())
    throw ArgumentError("slice_cols: range outside " +
                        std::to_string(x.cols()) + " columns");
  const int64_t r = x.rows(), c = x.cols();
  std::vector<double> out(r * count);
  for (int64_t i = 0; i < r; ++i)
    std::copy_n(x.values().data() + i * c + begin, count,
                out.data() + i * count);
  return make_op_result(
      {r, count}, std::move(out), {x},
      [begin, count, r, c](TensorNode& node) {
        auto& px = node.parents[0];
        if (!px->requires_grad) return;
        auto& gx = grad_of(px);
        for (int64_t i = 0; i < r; ++i)
          for (int64_t j = 0; j < count; ++j)
            gx[i * c + begin + j] += node.grad[i * count + j];
      },
      "slice_cols");
}

Tensor masked_mean_rows(const Tensor& x, const std::vector<uint8_t>& keep) {
  if (x.rank() != 2) throw ShapeError("masked_mean_rows: expected 2-D tensor");
  if (static_cast<int64_t>(keep.size()) != x.rows())
    throw ShapeError("masked_mean_rows: mask length " +
                     std::to_string(keep.size()) + " for " +
                     std::to_string(x.rows()) + " rows");
  int64_t n_keep = 0;
  for (uint8_t k : keep) n_keep += (k != 0);
  if (n_keep == 0)
    throw ArgumentError("masked_mean_rows: every position is masked");
  const int64_t r = x.rows(), c = x.cols();
  std::vector<double> out(c, 0.0);
  const auto& xv = x.values();
  for (int64_t i = 0; i < r; ++i) {
    if (!keep[i]) continue;
    for (int64_t j = 0; j < c; ++j) out[j] += xv[i * c + j];
  }
  for (double& v : out) v /= static_cast<double>(n_keep);
  return make_op_result(
      {1, c}, std::move(out), {x},
      [keep, n_keep, r, c](TensorNode& node) {
        auto& px = node.parents[0];
        if (!px->requires_grad) return;
        auto& gx = grad_of(px);
        const double inv = 1.0 / static_cast<double>(n_keep);
        for (int64_t i = 0; i < r; ++i) {
          if (!keep[i]) continue;
          for (int64_t j = 0; j < c; ++j) gx[i * c + j] += node.grad[j] * inv;
        }
      },
      "masked_mean_rows");
}

Tensor mean_all(const Tensor& x) {
  const int64_t n = x.size();
  double s = 0.0;
  for (double v : x.values()) s += v;
  return make_op_result(
      {1}, {s / static_cast<double>(n)}, {x},
      [n](TensorNode& node) {
        auto& px = node.parents[0];
        if (!px->requires_grad) return;
        auto& gx = grad_of(px);
        const double g = node.grad[0] / static_cast<double>(n);
        for (double& v : gx) v += g;
      },
      "mean_all");
}

Tensor sum_all(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return make_op_result(
      {1}, {s}, {x},
      [](TensorNode& node) {
        auto& px = node.parents[0];
        if (!px->requires_grad) return;
        auto& gx = grad_of(px);
        for (double& v : gx) v += node.grad[0];
      },
      "sum_all");
}

Tensor cross_entropy_label_smoothed(const Tensor& logits,
                                    const std::vector<int>& targets,
                                    double smoothing, int pad_id) {
  if (logits.rank() != 2)
    throw ShapeError("cross_entropy: logits must be L x V");
  if (smoothing < 0.0 || smoothing >= 1.0)
    throw ArgumentError("cross_entropy: smoothing must be in [0, 1)");
  const int64_t rows = logits.rows(), v = logits.cols();
  if (static_cast<int64_t>(targets.size()) != rows)
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) +
                     " targets for " + std::to_string(rows) + " logit rows");
  int64_t n_real = 0;
  for (int t : targets) {
    if (t == pad_id) continue;
    if (t < 0 || t >= v)
      throw IndexError("cross_entropy: target id " + std::to_string(t) +
                       " outside vocabulary of size " + std::to_string(v));
    ++n_real;
  }
  if (n_real == 0)
    throw ArgumentError("cross_entropy: all target positions are padding");

  const auto& lv = logits.values();
  std::vector<double> probs(rows * v, 0.0);  // saved for backward
  const double q_other = v > 1 ? smoothing / static_cast<double>(v - 1) : 0.0;
  const double q_gold = 1.0 - smoothing;
  double loss = 0.0;
  for (int64_t r = 0; r < rows; ++r) {
    if (targets[r] == pad_id) continue;
    const double* row = lv.data() + r * v;
    double mx = row[0];
    for (int64_t j = 1; j < v; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0, sum_logits = 0.0;
    for (int64_t j = 0; j < v; ++j) {
      denom += std::exp(row[j] - mx);
      sum_logits += row[j];
    }
    const double lse = std::log(denom) + mx;
    for (int64_t j = 0; j < v; ++j)
      probs[r * v + j] = std::exp(row[j] - mx) / denom;
    // -sum_v q_v * (logit_v - lse)
    const double gold = row[targets[r]];
    const double expected_logit =
        q_gold * gold + q_other * (sum_logits - gold);
    loss += lse - expected_logit;
  }
  loss /= static_cast<double>(n_real);

  return make_op_result(
      {1}, {loss}, {logits},
      [targets, pad_id, rows, v, q_gold, q_other, n_real,
       probs = std::move(probs)](TensorNode& node) {
        auto& pl = node.parents[0];
        if (!pl->requires_grad) return;
        auto& gl = grad_of(pl);
        const double g = node.grad[0] / static_cast<double>(n_real);
        for (int64_t r = 0; r < rows; ++r) {
          if (targets[r] == pad_id) continue;
          for (int64_t j = 0; j < v; ++j) {
            const double q = (j == targets[r]) ? q_gold : q_other;
            gl[r * v + j] += g * (probs[r * v + j] - q);
          }
        }
      },
      "cross_entropy_label_smoothed");
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, bool whole_rows) {
  if (rate < 0.0 || rate >= 1.0)
    throw ArgumentError("dropout: rate must be in [0, 1)");
  if (rate == 0.0) return x;  // identity
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  if (whole_rows) {
    if (x.rank() != 2) throw ShapeError("dropout: whole_rows needs 2-D input");
    const int64_t r = x.rows(), c = x.cols();
    for (int64_t i = 0; i < r; ++i) {
      const double m = rng.bernoulli(rate) ? 0.0 : keep_scale;
      for (int64_t j = 0; j < c; ++j) mask[i * c + j] = m;
    }
  } else {
    for (auto& m : mask) m = rng.bernoulli(rate) ? 0.0 : keep_scale;
  }
  std::vector<double> out(x.values());
  for (size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return make_op_result(
      x.shape(), std::move(out), {x},
      [mask = std::move(mask)](TensorNode& node) {
        auto& px = node.parents[0];
        if (!px->requires_grad) return;
        auto& gx = grad_of(px);
        for (size_t i = 0; i < gx.size(); ++i) gx[i] += node.grad[i] * mask[i];
      },
      "dropout");
}

// ---------------------------------------------------------------------------
// Backward

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw ContractError("backward: loss must be a scalar tensor");
  if (!loss.requires_grad())
    throw ContractError("backward: loss does not depend on any tracked tensor");

  // Iterative DFS post-order over parents.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> visited;
  struct Frame {
    TensorNode* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({loss.node().get(), 0});
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      TensorNode* p = f.node->parents[f.next_parent++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  for (TensorNode* n : order) {
    n->ensure_grad();
    std::fill(n->grad.begin(), n->grad.end(), 0.0);
  }
  loss.node()->grad[0] = 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (n->backprop) n->backprop(*n);
  }

  for (TensorNode* n : order) {
    for (double g : n->grad)
      if (!std::isfinite(g))
        throw NumericError(std::string("backward: non-finite gradient from op ") +
                           n->op_name);
  }
}

}  // namespace zs::core
