// tests/test_model.cc

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/error.h"
#include "data/audio.h"
#include "data/corpus.h"
#include "data/datasets.h"
#include "data/vocab.h"
#include "model/transformer.h"
#include "testing_util.h"

using namespace zs;
using namespace zs::data;
using namespace zs::model;
using core::Tensor;
using zs::testing::finite_diff_sampled_err;

namespace {

Vocabulary test_vocab() {
  return Vocabulary::build({"abcdefghijklmnopqrstuvwxyz .!?",
                            "ABCDEFGHIJKLMNOPQRSTUVWXYZ"});
}

ModelConfig micro_config(const Vocabulary& vocab) {
  ModelConfig cfg;
  cfg.audio_layers = 3;
  cfg.text_layers = 2;
  cfg.decoder_layers = 2;
  cfg.model_dim = 16;
  cfg.inner_dim = 32;
  cfg.heads = 2;
  cfg.feature_dim = 6;
  cfg.vocab_size = vocab.size();
  return cfg;
}

UtteranceFrames frames_for(const std::string& text, int dim,
                           uint64_t seed = 11) {
  return render_pseudo_audio(text, seed, 0.05, dim);
}

bool tensors_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && a.values() == b.values();
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0;
  for (int64_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace

TEST_CASE("config validation") {
  Vocabulary vocab = test_vocab();
  ModelConfig cfg = micro_config(vocab);
  CHECK_NOTHROW(cfg.validate());
  ModelConfig bad = cfg;
  bad.text_layers = bad.audio_layers + 1;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = cfg;
  bad.aux_weight = -0.5;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = cfg;
  bad.model_dim = 30;  // not divisible by heads=2? it is; use odd
  bad.heads = 4;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);

  // depi layer index is ceil(text_layers / 2), counting from one.
  ModelConfig c12 = cfg;
  c12.audio_layers = 32;
  c12.text_layers = 12;
  CHECK(c12.depi_shared_index() == 5);
  CHECK(cfg.depi_shared_index() == 0);  // 2 shared layers -> first

  auto kv = cfg.to_kv();
  ModelConfig back = ModelConfig::from_kv(kv);
  CHECK(back.model_dim == cfg.model_dim);
  CHECK(back.vocab_size == cfg.vocab_size);
  kv.erase("heads");
  CHECK_THROWS_AS(ModelConfig::from_kv(kv), FormatError);
}

TEST_CASE("shared layers are physically shared between encoders") {
  Vocabulary vocab = test_vocab();
  Model m(micro_config(vocab), 5);
  auto ids = vocab.encode("hello there.");
  auto utt = frames_for("hi.", 6);

  auto text_before = m.encode_text(ids, Lang::TGT).states;
  auto audio_before = m.encode_audio(utt, Lang::SRC).states;

  // One parameter entry per shared layer; bumping it moves both paths.
  auto& w = m.params().get("enc.shared.0.attn.wq");
  w.values()[3] += 0.5;

  auto text_after = m.encode_text(ids, Lang::TGT).states;
  auto audio_after = m.encode_audio(utt, Lang::SRC).states;
  CHECK(max_abs_diff(text_before, text_after) > 1e-9);
  CHECK(max_abs_diff(audio_before, audio_after) > 1e-9);
}

TEST_CASE("encoder output shapes include the prepended tag") {
  Vocabulary vocab = test_vocab();
  Model m(micro_config(vocab), 5);
  auto ids = vocab.encode("abc.");
  auto out = m.encode_text(ids, Lang::SRC);
  CHECK(out.states.rows() == static_cast<int64_t>(ids.size()) + 1);
  CHECK(out.states.cols() == 16);
  CHECK(out.mask.size() == ids.size() + 1);

  auto utt = frames_for("ab.", 6);
  auto aout = m.encode_audio(utt, Lang::SRC);
  CHECK(aout.states.rows() == utt.n_frames + 1);

  CHECK_THROWS_AS(m.encode_text({}, Lang::SRC), ArgumentError);
  auto bad = frames_for("a", 5);
  CHECK_THROWS_AS(m.encode_audio(bad, Lang::SRC), ArgumentError);
}

TEST_CASE("language tag changes text encoder states") {
  Vocabulary vocab = test_vocab();
  Model m(micro_config(vocab), 5);
  auto ids = vocab.encode("same words.");
  auto src = m.encode_text(ids, Lang::SRC).states;
  auto tgt = m.encode_text(ids, Lang::TGT).states;
  CHECK(max_abs_diff(src, tgt) > 1e-9);
}

TEST_CASE("trailing pads leave unmasked text states bit-identical") {
  Vocabulary vocab = test_vocab();
  Model m(micro_config(vocab), 5);
  auto ids = vocab.encode("abc de.");
  auto plain = m.encode_text(ids, Lang::SRC);

  auto padded_ids = ids;
  padded_ids.push_back(Vocabulary::kPad);
  padded_ids.push_back(Vocabulary::kPad);
  auto padded = m.encode_text(padded_ids, Lang::SRC);

  CHECK_FALSE(padded.mask[padded.mask.size() - 1]);
  const int64_t d = plain.states.cols();
  for (int64_t r = 0; r < plain.states.rows(); ++r)
    for (int64_t c = 0; c < d; ++c)
      CHECK(plain.states.at(r, c) == padded.states.at(r, c));
}

TEST_CASE("masked audio frames do not influence states or pooling") {
  Vocabulary vocab = test_vocab();
  Model m(micro_config(vocab), 5);
  auto utt = frames_for("abc.", 6);
  std::vector<uint8_t> mask(utt.n_frames, 1);
  mask[utt.n_frames - 1] = 0;
  mask[utt.n_frames - 2] = 0;

  auto out1 = m.encode_audio(utt, Lang::SRC, Mode::Eval, &mask);
  auto pool1 = Model::mean_pool(out1);

  auto perturbed = utt;
  for (int64_t d = 0; d < perturbed.dim; ++d) {
    perturbed.data[(perturbed.n_frames - 1) * perturbed.dim + d] += 17.0;
    perturbed.data[(perturbed.n_frames - 2) * perturbed.dim + d] -= 3.0;
  }
  auto out2 = m.encode_audio(perturbed, Lang::SRC, Mode::Eval, &mask);
  auto pool2 = Model::mean_pool(out2);

  for (int64_t r = 0; r < out1.states.rows(); ++r) {
    if (!out1.mask[r]) continue;
    for (int64_t c = 0; c < out1.states.cols(); ++c)
      CHECK(out1.states.at(r, c) == out2.states.at(r, c));
  }
  CHECK(tensors_equal(pool1, pool2));
}

TEST_CASE("depi removes the residual only at the middle shared layer") {
  Vocabulary vocab = test_vocab();
  ModelConfig cfg = micro_config(vocab);
  cfg.depi = true;
  Model with(cfg, 7);
  ModelConfig cfg_off = cfg;
  cfg_off.depi = false;
  Model without(cfg_off, 7);  // identical weights (same init seed)

  core::Rng rng(3);
  Tensor x = zs::testing::random_tensor({5, 16}, rng, false);
  Tensor none;

  // Same input through each shared layer individually: only the middle
  // (index 0 of 2 here) differs; the other layer's arithmetic is unchanged.
  auto a0 = with.run_encoder_layer(true, 0, x, none, Mode::Eval);
  auto b0 = without.run_encoder_layer(true, 0, x, none, Mode::Eval);
  CHECK(max_abs_diff(a0, b0) > 1e-9);

  auto a1 = with.run_encoder_layer(true, 1, x, none, Mode::Eval);
  auto b1 = without.run_encoder_layer(true, 1, x, none, Mode::Eval);
  CHECK(tensors_equal(a1, b1));

  // Private audio layers never drop residuals.
  auto ap = with.run_encoder_layer(false, 0, x, none, Mode::Eval);
  auto bp = without.run_encoder_layer(false, 0, x, none, Mode::Eval);
  CHECK(tensors_equal(ap, bp));

  // Whole-encoder ablation: same weights, depi on/off differ.
  auto utt = frames_for("abc.", 6);
  auto eon = with.encode_audio(utt, Lang::SRC).states;
  auto eoff = without.encode_audio(utt, Lang::SRC).states;
  CHECK(max_abs_diff(eon, eoff) > 1e-9);
}

TEST_CASE("depi arithmetic: residual kept vs removed on a zero-weight layer") {
  Vocabulary vocab = test_vocab();
  ModelConfig cfg = micro_config(vocab);
  Model m(cfg, 9);
  // Zero every parameter of shared layer 0 (including layer norms).
  for (const auto& [name, t] : m.params().entries()) {
    if (name.rfind("enc.shared.0.", 0) == 0) {
      auto& vals = m.params().get(name).values();
      std::fill(vals.begin(), vals.end(), 0.0);
    }
  }
  core::Rng rng(4);
  Tensor x = zs::testing::random_tensor({4, 16}, rng, false);
  Tensor none;

  // Residual kept: zero sublayers pass x through unchanged.
  auto kept = m.run_encoder_layer_with_residual(true, 0, x, none, false,
                                                Mode::Eval);
  CHECK(tensors_equal(kept, x));

  // Residual removed: the layer output collapses to zero, not x.
  auto removed = m.run_encoder_layer_with_residual(true, 0, x, none, true,
                                                   Mode::Eval);
  for (double v : removed.values()) CHECK(v == 0.0);
}

TEST_CASE("decode shapes, causality, and tag sensitivity") {
  Vocabulary vocab = test_vocab();
  Model m(micro_config(vocab), 5);
  auto enc = m.encode_text(vocab.encode("abc."), Lang::TGT);

  std::vector<int> prefix = {Vocabulary::kBos};
  auto more = vocab.encode("xy z");
  prefix.insert(prefix.end(), more.begin(), more.end());

  auto logits = m.decode(enc, prefix, Lang::TGT);
  CHECK(logits.rows() == static_cast<int64_t>(prefix.size()));
  CHECK(logits.cols() == vocab.size());

  // Perturbing tokens after position t leaves logits at <= t unchanged.
  auto perturbed = prefix;
  perturbed[3] = vocab.encode_char('q');
  auto logits2 = m.decode(enc, perturbed, Lang::TGT);
  for (int64_t t = 0; t < 3; ++t)
    for (int64_t v = 0; v < logits.cols(); ++v)
      CHECK(logits.at(t, v) == logits2.at(t, v));
  double diff_after = 0;
  for (int64_t v = 0; v < logits.cols(); ++v)
    diff_after =
        std::max(diff_after, std::fabs(logits.at(3, v) - logits2.at(3, v)));
  CHECK(diff_after > 1e-9);

  // The language embedding is concatenated at every position: switching the
  // tag moves the logits everywhere.
  auto logits_src = m.decode(enc, prefix, Lang::SRC);
  for (int64_t t = 0; t < logits.rows(); ++t) {
    double d = 0;
    for (int64_t v = 0; v < logits.cols(); ++v)
      d = std::max(d, std::fabs(logits.at(t, v) - logits_src.at(t, v)));
    CHECK(d > 1e-12);
  }

  CHECK_THROWS_AS(m.decode(enc, {vocab.size() + 3}, Lang::TGT), IndexError);
  CHECK_THROWS_AS(m.decode(enc, {}, Lang::TGT), ArgumentError);
}

TEST_CASE("greedy decode: eos-favoring model yields empty output") {
  Vocabulary vocab = test_vocab();
  Model m(micro_config(vocab), 5);
  // Freeze the decoder output at the final layer-norm bias, and point the
  // tied projection so <eos> always wins.
  auto& g = m.params().get("dec.final_ln.g").values();
  std::fill(g.begin(), g.end(), 0.0);
  auto& b = m.params().get("dec.final_ln.b").values();
  std::fill(b.begin(), b.end(), 1.0);
  auto& e = m.params().get("embed.tok").values();
  std::fill(e.begin(), e.end(), 0.0);
  auto emb = m.params().get("embed.tok");
  for (int64_t c = 0; c < emb.cols(); ++c)
    emb.set(Vocabulary::kEos, c, 1.0);

  auto enc = m.encode_text(vocab.encode("abc."), Lang::TGT);
  CHECK(m.greedy_decode(enc, Lang::TGT, 20).empty());
}

TEST_CASE("greedy decode is deterministic and capped") {
  Vocabulary vocab = test_vocab();
  Model m(micro_config(vocab), 6);
  auto enc = m.encode_text(vocab.encode("some input."), Lang::TGT);
  auto a = m.greedy_decode(enc, Lang::TGT, 12);
  auto b = m.greedy_decode(enc, Lang::TGT, 12);
  CHECK(a == b);
  CHECK(a.size() <= 12);
}

TEST_CASE("mean_pool basics") {
  Vocabulary vocab = test_vocab();
  EncoderOutput one;
  one.states = Tensor::from_values({3, 2}, {1, 2, 3, 4, 5, 6});
  one.mask = {0, 1, 0};
  auto pooled = Model::mean_pool(one);
  CHECK(pooled.at(0, 0) == 3.0);
  CHECK(pooled.at(0, 1) == 4.0);

  EncoderOutput constant;
  constant.states = Tensor::constant({4, 2}, 2.5);
  constant.mask = {1, 1, 1, 1};
  auto cp = Model::mean_pool(constant);
  CHECK(cp.at(0, 0) == 2.5);
  CHECK(cp.at(0, 1) == 2.5);

  EncoderOutput all_masked;
  all_masked.states = Tensor::constant({2, 2}, 1.0);
  all_masked.mask = {0, 0};
  CHECK_THROWS_AS(Model::mean_pool(all_masked), ArgumentError);
}

TEST_CASE("aux_loss hand case and symmetry") {
  EncoderOutput a, b;
  a.states = Tensor::from_values({1, 2}, {1, 1});
  a.mask = {1};
  b.states = Tensor::from_values({1, 2}, {0, 1});
  b.mask = {1};
  // mean over dims of squared differences: ((1-0)^2 + 0) / 2 = 0.5
  CHECK(Model::aux_loss(a, b).item() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(Model::aux_loss(b, a).item() ==
        doctest::Approx(Model::aux_loss(a, b).item()).epsilon(1e-12));
  CHECK(Model::aux_loss(a, a).item() == 0.0);

  EncoderOutput wrong;
  wrong.states = Tensor::from_values({1, 3}, {0, 0, 0});
  wrong.mask = {1};
  CHECK_THROWS_AS(Model::aux_loss(a, wrong), ContractError);
}

TEST_CASE("forward_loss decomposition and aux weighting") {
  Vocabulary vocab = test_vocab();
  ParallelCorpus corpus = gen_parallel_corpus(31, 10, 12);
  AssembleOptions opts;
  opts.feature_dim = 6;

  auto datasets =
      assemble_training_set(corpus.train, Setting::Plain, vocab, opts);
  Batch asr_batch;
  asr_batch.asr_like = true;
  for (int i = 0; i < 3; ++i)
    asr_batch.samples.push_back(&datasets[0].samples[i]);
  Batch mt_batch;
  for (int i = 0; i < 3; ++i)
    mt_batch.samples.push_back(&datasets[1].samples[i]);

  ModelConfig cfg = micro_config(vocab);
  cfg.feature_dim = 6;

  SUBCASE("lambda = 0: total is exactly the ce part") {
    Model m(cfg, 21);
    auto parts = m.forward_loss(asr_batch, Mode::Eval);
    CHECK(parts.total_value() == parts.ce_value());
    CHECK(parts.aux_pairs == 0);
  }

  SUBCASE("lambda = 5: total - ce = 5 * aux") {
    ModelConfig c5 = cfg;
    c5.aux_weight = 5.0;
    Model m(c5, 21);
    auto parts = m.forward_loss(asr_batch, Mode::Eval);
    CHECK(parts.aux_pairs == 3);
    CHECK(parts.total_value() - parts.ce_value() ==
          doctest::Approx(5.0 * parts.aux_value()).epsilon(1e-9));

    // Text-only batch carries no alignable pair: aux part is zero.
    auto tparts = m.forward_loss(mt_batch, Mode::Eval);
    CHECK(tparts.aux_pairs == 0);
    CHECK(tparts.total_value() == tparts.ce_value());
  }

  SUBCASE("ce equals the standalone cross entropy over the same batch") {
    Model m(cfg, 21);
    auto parts = m.forward_loss(mt_batch, Mode::Eval);
    double expected = 0;
    int64_t total_tokens = 0;
    for (const auto* s : mt_batch.samples)
      total_tokens += static_cast<int64_t>(s->output_ids.size()) + 1;
    for (const auto* s : mt_batch.samples) {
      auto enc = m.encode_text(s->input_ids, s->target_lang, Mode::Eval);
      std::vector<int> prefix = {Vocabulary::kBos};
      prefix.insert(prefix.end(), s->output_ids.begin(), s->output_ids.end());
      std::vector<int> targets = s->output_ids;
      targets.push_back(Vocabulary::kEos);
      auto logits = m.decode(enc, prefix, s->target_lang, Mode::Eval);
      auto ce = core::cross_entropy_label_smoothed(
          logits, targets, cfg.label_smoothing, Vocabulary::kPad);
      expected += ce.item() * static_cast<double>(targets.size()) /
                  static_cast<double>(total_tokens);
    }
    CHECK(parts.ce_value() == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("shared layer gradient is the sum of text and audio path gradients") {
  Vocabulary vocab = test_vocab();
  ParallelCorpus corpus = gen_parallel_corpus(37, 8, 12);
  AssembleOptions opts;
  opts.feature_dim = 6;
  auto datasets =
      assemble_training_set(corpus.train, Setting::Plain, vocab, opts);

  ModelConfig cfg = micro_config(vocab);
  cfg.feature_dim = 6;
  Model m(cfg, 33);

  Batch audio_batch;
  audio_batch.samples.push_back(&datasets[0].samples[0]);
  Batch text_batch;
  text_batch.samples.push_back(&datasets[1].samples[0]);
  Batch joint;
  joint.samples = {&datasets[0].samples[0], &datasets[1].samples[0]};

  auto& w = m.params().get("enc.shared.1.ffn.w1");
  const int64_t n_check = std::min<int64_t>(w.size(), 64);

  // Joint batch averages per-token; single backwards need the same weights.
  int64_t audio_tokens =
      static_cast<int64_t>(datasets[0].samples[0].output_ids.size()) + 1;
  int64_t text_tokens =
      static_cast<int64_t>(datasets[1].samples[0].output_ids.size()) + 1;
  int64_t total = audio_tokens + text_tokens;

  core::backward(m.forward_loss(joint, Mode::Eval).total);
  std::vector<double> joint_grad(w.grad().begin(), w.grad().begin() + n_check);

  core::backward(m.forward_loss(audio_batch, Mode::Eval).total);
  std::vector<double> audio_grad(w.grad().begin(), w.grad().begin() + n_check);
  core::backward(m.forward_loss(text_batch, Mode::Eval).total);
  std::vector<double> text_grad(w.grad().begin(), w.grad().begin() + n_check);

  const double wa = static_cast<double>(audio_tokens) / total;
  const double wt = static_cast<double>(text_tokens) / total;
  for (int64_t i = 0; i < n_check; ++i)
    CHECK(joint_grad[i] ==
          doctest::Approx(wa * audio_grad[i] + wt * text_grad[i]).epsilon(1e-9));
}

TEST_CASE("micro model end-to-end gradients match finite differences") {
  Vocabulary vocab = test_vocab();
  ParallelCorpus corpus = gen_parallel_corpus(41, 8, 12);
  AssembleOptions opts;
  opts.feature_dim = 6;
  auto datasets =
      assemble_training_set(corpus.train, Setting::Plain, vocab, opts);

  ModelConfig cfg = micro_config(vocab);
  cfg.feature_dim = 6;
  cfg.aux_weight = 5.0;  // exercise the aux path too
  Model m(cfg, 55);

  Batch batch;
  batch.asr_like = true;
  batch.samples = {&datasets[0].samples[0], &datasets[0].samples[1]};

  auto forward = [&] { return m.forward_loss(batch, Mode::Eval).total_value(); };
  core::backward(m.forward_loss(batch, Mode::Eval).total);

  core::Rng pick(60);
  for (const char* name :
       {"embed.tok", "embed.audio_tag", "audio.in_proj.w",
        "enc.private.0.attn.wq", "enc.shared.0.ffn.w1", "enc.shared.1.attn.wv",
        "enc.final_ln.g", "dec.0.cross.wk", "dec.1.ffn.w2", "dec.lang_cat.w",
        "dec.final_ln.b"}) {
    auto& p = m.params().get(name);
    std::vector<double> analytic = p.grad();
    INFO(name);
    CHECK(finite_diff_sampled_err(p, forward, analytic, 4, pick) < 1e-4);
  }
}

TEST_CASE("forward passes are deterministic in train mode given a seed") {
  Vocabulary vocab = test_vocab();
  ParallelCorpus corpus = gen_parallel_corpus(43, 6, 12);
  AssembleOptions opts;
  opts.feature_dim = 6;
  auto datasets =
      assemble_training_set(corpus.train, Setting::Plain, vocab, opts);
  Batch batch;
  batch.samples = {&datasets[1].samples[0], &datasets[1].samples[1]};

  ModelConfig cfg = micro_config(vocab);
  cfg.feature_dim = 6;
  auto run = [&] {
    Model m(cfg, 77);
    m.reseed_dropout(99);
    return m.forward_loss(batch, Mode::Train).total_value();
  };
  CHECK(run() == run());
}
