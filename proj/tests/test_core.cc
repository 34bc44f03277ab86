// tests/test_core.cc

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/adam.h"
#include "core/rng.h"
#include "core/tensor.h"
#include "testing_util.h"

using namespace zs;
using namespace zs::core;
using zs::testing::finite_diff_max_err;
using zs::testing::random_tensor;
using zs::testing::rel_err;

TEST_CASE("matmul identity") {
  auto I = Tensor::from_values({2, 2}, {1, 0, 0, 1});
  auto A = Tensor::from_values({2, 2}, {3.5, -1.25, 2.0, 7.0});
  auto C = matmul(I, A);
  for (int i = 0; i < 4; ++i) CHECK(C.values()[i] == A.values()[i]);
}

TEST_CASE("matmul hand-computed product") {
  auto A = Tensor::from_values({2, 2}, {1, 2, 3, 4});
  auto B = Tensor::from_values({2, 2}, {5, 6, 7, 8});
  auto C = matmul(A, B);
  CHECK(C.values() == std::vector<double>{19, 22, 43, 50});
}

TEST_CASE("matmul shape mismatch names both shapes") {
  auto A = Tensor::zeros({2, 3});
  auto B = Tensor::zeros({2, 2});
  CHECK_THROWS_WITH_AS(matmul(A, B), doctest::Contains("[2x3]"), ShapeError);
}

TEST_CASE("matmul gradient matches finite differences") {
  Rng rng(7);
  auto A = random_tensor({3, 4}, rng);
  auto B = random_tensor({4, 2}, rng);
  auto forward = [&] { return sum_all(matmul(A, B)).item(); };
  auto loss = sum_all(matmul(A, B));
  backward(loss);
  CHECK(finite_diff_max_err(A, forward, A.grad()) < 1e-4);
  CHECK(finite_diff_max_err(B, forward, B.grad()) < 1e-4);
}

TEST_CASE("softmax symmetry and hand case") {
  auto x = Tensor::from_values({2}, {0.0, 0.0});
  auto y = softmax(x, 0);
  CHECK(y.values()[0] == doctest::Approx(0.5).epsilon(1e-12));

  auto z = softmax(Tensor::from_values({2}, {0.0, std::log(3.0)}), 0);
  CHECK(z.values()[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(z.values()[1] == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("softmax shift invariance and row sums") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    auto x = random_tensor({5, 7}, rng, false, 3.0);
    auto y = softmax(x, 1);
    const double c = rng.uniform(-10, 10);
    auto shifted = softmax(add(x, Tensor::constant({5, 7}, c)), 1);
    for (int64_t i = 0; i < y.size(); ++i)
      CHECK(rel_err(y.values()[i], shifted.values()[i]) < 1e-9);
    for (int64_t r = 0; r < 5; ++r) {
      double s = 0;
      for (int64_t j = 0; j < 7; ++j) s += y.at(r, j);
      CHECK(std::fabs(s - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("softmax over axis 0") {
  auto x = Tensor::from_values({2, 2}, {0.0, 1.0, std::log(3.0), 1.0});
  auto y = softmax(x, 0);
  CHECK(y.at(0, 0) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(y.at(1, 0) == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(y.at(0, 1) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS(softmax(x, 2), ArgumentError);
}

TEST_CASE("layer_norm constant row is zero, two-point row is preserved") {
  auto gain = Tensor::constant({4}, 1.0);
  auto bias = Tensor::zeros({4});
  auto x = Tensor::constant({2, 4}, 3.25);
  auto y = layer_norm(x, gain, bias, 1e-5);
  for (double v : y.values()) CHECK(std::fabs(v) < 1e-9);

  auto g2 = Tensor::constant({2}, 1.0);
  auto b2 = Tensor::zeros({2});
  auto z = layer_norm(Tensor::from_values({1, 2}, {1.0, -1.0}), g2, b2, 1e-12);
  CHECK(z.at(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(z.at(0, 1) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("layer_norm gradient matches finite differences") {
  Rng rng(13);
  auto x = random_tensor({3, 5}, rng);
  auto gain = random_tensor({5}, rng);
  auto bias = random_tensor({5}, rng);
  auto forward = [&] {
    return sum_all(mul(layer_norm(x, gain, bias, 1e-5),
                       layer_norm(x, gain, bias, 1e-5)))
        .item();
  };
  auto y = layer_norm(x, gain, bias, 1e-5);
  backward(sum_all(mul(y, y)));
  CHECK(finite_diff_max_err(x, forward, x.grad()) < 1e-4);
  CHECK(finite_diff_max_err(gain, forward, gain.grad()) < 1e-4);
  CHECK(finite_diff_max_err(bias, forward, bias.grad()) < 1e-4);
}

TEST_CASE("cross entropy basics") {
  // Gold probability -> 1 drives the unsmoothed loss to 0.
  auto logits = Tensor::from_values({1, 3}, {100.0, 0.0, 0.0});
  auto l = cross_entropy_label_smoothed(logits, {0}, 0.0, -1);
  CHECK(l.item() < 1e-9);

  // Uniform logits, no smoothing: loss = ln V.
  auto u = Tensor::zeros({2, 5});
  auto lu = cross_entropy_label_smoothed(u, {3, 1}, 0.0, -1);
  CHECK(lu.item() == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy smoothed matches direct formula oracle") {
  // 3-class toy case evaluated against the definition:
  //   loss = -sum_v q_v log softmax(logits)_v
  const std::vector<double> lg = {0.3, -1.1, 0.7};
  const double s = 0.1;
  const int gold = 2;
  double mx = *std::max_element(lg.begin(), lg.end());
  double denom = 0;
  for (double v : lg) denom += std::exp(v - mx);
  double oracle = 0;
  for (int v = 0; v < 3; ++v) {
    const double logp = lg[v] - mx - std::log(denom);
    const double q = v == gold ? 1.0 - s : s / 2.0;
    oracle -= q * logp;
  }
  auto logits = Tensor::from_values({1, 3}, lg);
  auto l = cross_entropy_label_smoothed(logits, {gold}, s, -1);
  CHECK(std::fabs(l.item() - oracle) < 1e-10);
}

TEST_CASE("cross entropy excludes padding and validates targets") {
  auto logits = Tensor::from_values({2, 3}, {5.0, 0.0, 0.0, 9.9, 9.9, 9.9});
  // Second position is padding: loss equals the first row's loss alone.
  auto both = cross_entropy_label_smoothed(logits, {0, 1}, 0.0, 1);
  auto first = cross_entropy_label_smoothed(slice_rows(logits, 0, 1), {0}, 0.0, -1);
  CHECK(both.item() == doctest::Approx(first.item()).epsilon(1e-12));

  CHECK_THROWS_AS(cross_entropy_label_smoothed(logits, {0, 7}, 0.0, -1),
                  IndexError);
  CHECK_THROWS_AS(cross_entropy_label_smoothed(logits, {1, 1}, 0.0, 1),
                  ArgumentError);  // everything padded
}

TEST_CASE("cross entropy gradient matches finite differences") {
  Rng rng(17);
  auto logits = random_tensor({4, 6}, rng);
  std::vector<int> targets = {2, 0, 5, 0};
  auto forward = [&] {
    return cross_entropy_label_smoothed(logits, targets, 0.1, 0).item();
  };
  backward(cross_entropy_label_smoothed(logits, targets, 0.1, 0));
  CHECK(finite_diff_max_err(logits, forward, logits.grad()) < 1e-4);
}

TEST_CASE("backward leaves unrelated parameters at zero gradient") {
  Rng rng(19);
  auto A = random_tensor({2, 2}, rng);
  auto B = random_tensor({2, 2}, rng);
  backward(sum_all(mul(A, A)));
  for (double g : B.grad()) CHECK(g == 0.0);
  for (double g : A.grad()) CHECK(g != 0.0);
}

TEST_CASE("backward on two-matmul chain matches finite differences") {
  Rng rng(23);
  auto A = random_tensor({2, 3}, rng);
  auto B = random_tensor({3, 4}, rng);
  auto C = random_tensor({4, 2}, rng);
  auto forward = [&] { return sum_all(matmul(matmul(A, B), C)).item(); };
  backward(sum_all(matmul(matmul(A, B), C)));
  CHECK(finite_diff_max_err(A, forward, A.grad()) < 1e-4);
  CHECK(finite_diff_max_err(B, forward, B.grad()) < 1e-4);
  CHECK(finite_diff_max_err(C, forward, C.grad()) < 1e-4);
}

TEST_CASE("shared parameter receives the sum of both path gradients") {
  Rng rng(29);
  auto W = random_tensor({3, 3}, rng);
  auto x = random_tensor({2, 3}, rng, false);
  auto y = random_tensor({4, 3}, rng, false);

  backward(add(sum_all(matmul(x, W)), sum_all(matmul(y, W))));
  auto joint = W.grad();

  backward(sum_all(matmul(x, W)));
  auto path1 = W.grad();
  backward(sum_all(matmul(y, W)));
  auto path2 = W.grad();

  for (size_t i = 0; i < joint.size(); ++i)
    CHECK(joint[i] == doctest::Approx(path1[i] + path2[i]).epsilon(1e-12));
}

TEST_CASE("backward rejects non-scalar roots") {
  auto A = Tensor::zeros({2, 2}, true);
  CHECK_THROWS_AS(backward(scale(A, 2.0)), ContractError);
}

TEST_CASE("gradients accumulate within one graph and reset across calls") {
  auto p = Tensor::from_values({1}, {2.0}, true);
  // loss = p * p uses p twice: dL/dp = 2p = 4.
  backward(sum_all(mul(p, p)));
  CHECK(p.grad()[0] == doctest::Approx(4.0));
  // A second backward must not see stale accumulation.
  backward(sum_all(mul(p, p)));
  CHECK(p.grad()[0] == doctest::Approx(4.0));
}

TEST_CASE("elementwise and shaping ops match finite differences") {
  Rng rng(31);
  auto A = random_tensor({4, 3}, rng);
  auto B = random_tensor({4, 3}, rng);
  auto v = random_tensor({3}, rng);

  SUBCASE("add/sub/mul/scale/relu") {
    auto forward = [&] {
      auto t = add(mul(A, B), sub(A, scale(B, 0.3)));
      return sum_all(mul(relu(t), t)).item();
    };
    auto t = add(mul(A, B), sub(A, scale(B, 0.3)));
    backward(sum_all(mul(relu(t), t)));
    CHECK(finite_diff_max_err(A, forward, A.grad()) < 1e-4);
    CHECK(finite_diff_max_err(B, forward, B.grad()) < 1e-4);
  }

  SUBCASE("add_rowvec / transpose") {
    auto forward = [&] {
      return sum_all(mul(transpose(add_rowvec(A, v)), transpose(A))).item();
    };
    backward(sum_all(mul(transpose(add_rowvec(A, v)), transpose(A))));
    CHECK(finite_diff_max_err(A, forward, A.grad()) < 1e-4);
    CHECK(finite_diff_max_err(v, forward, v.grad()) < 1e-4);
  }

  SUBCASE("concat and slice") {
    auto zero_pad = Tensor::zeros({8, 2});
    auto rebuild = [&] {
      auto c = concat_cols(concat_rows(A, B), zero_pad);
      auto s = slice_cols(slice_rows(c, 1, 5), 0, 3);
      return sum_all(mul(s, s));
    };
    backward(rebuild());
    auto fwd = [&] { return rebuild().item(); };
    CHECK(finite_diff_max_err(A, fwd, A.grad()) < 1e-4);
    CHECK(finite_diff_max_err(B, fwd, B.grad()) < 1e-4);
  }

  SUBCASE("softmax gradient") {
    auto forward = [&] {
      auto y = softmax(A, 1);
      return sum_all(mul(y, B)).item();
    };
    backward(sum_all(mul(softmax(A, 1), B)));
    CHECK(finite_diff_max_err(A, forward, A.grad()) < 1e-4);
  }

  SUBCASE("masked_mean_rows and mean_all") {
    std::vector<uint8_t> keep = {1, 0, 1, 1};
    auto forward = [&] {
      auto m = masked_mean_rows(A, keep);
      return add(mean_all(mul(m, m)), mean_all(A)).item();
    };
    auto m = masked_mean_rows(A, keep);
    backward(add(mean_all(mul(m, m)), mean_all(A)));
    CHECK(finite_diff_max_err(A, forward, A.grad()) < 1e-4);
  }
}

TEST_CASE("embedding rows gather/scatter") {
  Rng rng(37);
  auto table = random_tensor({5, 3}, rng);
  std::vector<int> ids = {4, 0, 4, 2};
  auto out = embedding_rows(table, ids);
  CHECK(out.rows() == 4);
  for (int64_t j = 0; j < 3; ++j) {
    CHECK(out.at(0, j) == table.at(4, j));
    CHECK(out.at(2, j) == table.at(4, j));
  }
  auto forward = [&] {
    auto e = embedding_rows(table, ids);
    return sum_all(mul(e, e)).item();
  };
  auto e = embedding_rows(table, ids);
  backward(sum_all(mul(e, e)));
  CHECK(finite_diff_max_err(table, forward, table.grad()) < 1e-4);
  CHECK_THROWS_AS(embedding_rows(table, {5}), IndexError);
}

TEST_CASE("masked mean rejects an all-masked input") {
  auto x = Tensor::zeros({3, 2});
  CHECK_THROWS_AS(masked_mean_rows(x, {0, 0, 0}), ArgumentError);
}

TEST_CASE("dropout is identity at rate zero and rescales otherwise") {
  Rng rng(41);
  auto x = Tensor::constant({20, 10}, 1.0);
  auto same = dropout(x, 0.0, rng);
  CHECK(same.node().get() == x.node().get());

  Rng rng2(42);
  auto y = dropout(x, 0.5, rng2, false);
  int zeros = 0;
  for (double v : y.values()) {
    CHECK((v == 0.0 || v == doctest::Approx(2.0)));
    zeros += v == 0.0;
  }
  CHECK(zeros > 20);
  CHECK(zeros < 180);

  Rng rng3(43);
  auto w = dropout(x, 0.5, rng3, true);
  for (int64_t r = 0; r < 20; ++r) {
    bool all_zero = true, all_kept = true;
    for (int64_t c = 0; c < 10; ++c) {
      all_zero &= w.at(r, c) == 0.0;
      all_kept &= w.at(r, c) != 0.0;
    }
    CHECK((all_zero || all_kept));
  }
  CHECK_THROWS_AS(dropout(x, 1.0, rng), ArgumentError);
}

TEST_CASE("ops are deterministic given identical inputs and seeds") {
  auto run = [] {
    Rng rng(123);
    auto A = random_tensor({4, 4}, rng);
    auto B = random_tensor({4, 4}, rng);
    auto d = dropout(matmul(softmax(A, 1), B), 0.3, rng);
    return d.values();
  };
  CHECK(run() == run());
}

TEST_CASE("no-grad mode records no graph") {
  auto A = Tensor::zeros({2, 2}, true);
  NoGradGuard guard;
  auto y = sum_all(matmul(A, A));
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("noam schedule shape") {
  AdamConfig cfg;
  cfg.base_factor = 0.7;
  cfg.warmup_steps = 50;
  cfg.model_dim = 16;
  for (int64_t s = 1; s < 50; ++s)
    CHECK(noam_rate(cfg, s) < noam_rate(cfg, s + 1));
  // At s = warmup both branches of the min agree.
  const double w = 50.0;
  CHECK(rel_err(1.0 / std::sqrt(w), w / (w * std::sqrt(w))) < 1e-12);
  CHECK(noam_rate(cfg, 50) ==
        doctest::Approx(0.7 / 4.0 / std::sqrt(50.0)).epsilon(1e-12));
  for (int64_t s = 50; s < 80; ++s)
    CHECK(noam_rate(cfg, s) > noam_rate(cfg, s + 1));
  CHECK(noam_rate(cfg, 1) > 0.0);
}

TEST_CASE("adam single step matches the hand-evaluated update") {
  AdamConfig cfg;
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.999;
  cfg.eps = 1e-8;
  cfg.base_factor = 2.0;
  cfg.warmup_steps = 100;
  cfg.model_dim = 4;

  auto p = Tensor::from_values({1}, {1.5}, true);
  p.grad()[0] = 0.25;
  std::vector<Tensor> params = {p};
  AdamState state(cfg, params);
  state.step_update(params);

  // Hand evaluation of the Adam formulas at step 1.
  const double g = 0.25;
  const double m = (1 - 0.9) * g;
  const double v = (1 - 0.999) * g * g;
  const double mhat = m / (1 - 0.9);
  const double vhat = v / (1 - 0.999);
  const double lr = 2.0 / std::sqrt(4.0) * std::min(1.0, 1.0 / (100.0 * std::sqrt(100.0)));
  const double expect = 1.5 - lr * mhat / (std::sqrt(vhat) + 1e-8);
  CHECK(std::fabs(p.values()[0] - expect) < 1e-12);
  CHECK(state.step() == 1);
}

TEST_CASE("adam leaves parameters unchanged on zero gradient") {
  AdamConfig cfg;
  auto p = Tensor::from_values({2, 2}, {1, 2, 3, 4}, true);
  p.zero_grad();
  std::vector<Tensor> params = {p};
  AdamState state(cfg, params);
  state.step_update(params);
  CHECK(p.values() == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("non-finite op output raises") {
  auto big = Tensor::constant({1, 1}, 1e308);
  CHECK_THROWS_AS(matmul(scale(big, 10.0), big), NumericError);
}
