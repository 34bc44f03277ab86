// src/model/transformer.cc

#include "model/transformer.h"

#include <algorithm>
#include <cmath>

namespace zs::model {

using core::Tensor;

namespace {
constexpr double kLnEps = 1e-5;
constexpr double kMaskBias = -1e9;

int audio_tag_row(data::Lang lang) {
  switch (lang) {
    case data::Lang::SRC: return 0;
    case data::Lang::TGT: return 1;
    case data::Lang::SRCR: return 2;
  }
  throw ArgumentError("audio_tag_row: bad enum value");
}
}  // namespace

// ---------------------------------------------------------------------------
// ModelConfig serialization

std::map<std::string, std::string> ModelConfig::to_kv() const {
  std::map<std::string, std::string> kv;
  kv["audio_layers"] = std::to_string(audio_layers);
  kv["text_layers"] = std::to_string(text_layers);
  kv["decoder_layers"] = std::to_string(decoder_layers);
  kv["model_dim"] = std::to_string(model_dim);
  kv["inner_dim"] = std::to_string(inner_dim);
  kv["heads"] = std::to_string(heads);
  kv["dropout"] = std::to_string(dropout);
  kv["attn_dropout"] = std::to_string(attn_dropout);
  kv["word_dropout"] = std::to_string(word_dropout);
  kv["embed_dropout"] = std::to_string(embed_dropout);
  kv["label_smoothing"] = std::to_string(label_smoothing);
  kv["aux_weight"] = std::to_string(aux_weight);
  kv["depi"] = depi ? "1" : "0";
  kv["feature_dim"] = std::to_string(feature_dim);
  kv["vocab_size"] = std::to_string(vocab_size);
  return kv;
}

ModelConfig ModelConfig::from_kv(const std::map<std::string, std::string>& kv) {
  ModelConfig cfg;
  auto want = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw FormatError(std::string("model config: missing key ") + key);
    return it->second;
  };
  cfg.audio_layers = std::stoi(want("audio_layers"));
  cfg.text_layers = std::stoi(want("text_layers"));
  cfg.decoder_layers = std::stoi(want("decoder_layers"));
  cfg.model_dim = std::stoi(want("model_dim"));
  cfg.inner_dim = std::stoi(want("inner_dim"));
  cfg.heads = std::stoi(want("heads"));
  cfg.dropout = std::stod(want("dropout"));
  cfg.attn_dropout = std::stod(want("attn_dropout"));
  cfg.word_dropout = std::stod(want("word_dropout"));
  cfg.embed_dropout = std::stod(want("embed_dropout"));
  cfg.label_smoothing = std::stod(want("label_smoothing"));
  cfg.aux_weight = std::stod(want("aux_weight"));
  cfg.depi = want("depi") == "1";
  cfg.feature_dim = std::stoi(want("feature_dim"));
  cfg.vocab_size = std::stoi(want("vocab_size"));
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// ParameterStore

Tensor ParameterStore::create(const std::string& name, core::Shape shape) {
  if (index_.count(name))
    throw ArgumentError("parameter '" + name + "' already registered");
  Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
  index_[name] = entries_.size();
  entries_.emplace_back(name, t);
  return t;
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end())
    throw ArgumentError("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw ArgumentError("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

bool ParameterStore::has(const std::string& name) const {
  return index_.count(name) != 0;
}

std::vector<Tensor> ParameterStore::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& [name, t] : entries_) out.push_back(t);
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& [name, t] : entries_) t.zero_grad();
}

int64_t ParameterStore::total_size() const {
  int64_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

// ---------------------------------------------------------------------------
// Bias builders

Tensor key_mask_bias(int64_t q_len, const std::vector<uint8_t>& key_mask) {
  const int64_t k_len = static_cast<int64_t>(key_mask.size());
  Tensor bias = Tensor::zeros({q_len, k_len});
  auto& v = bias.values();
  for (int64_t q = 0; q < q_len; ++q)
    for (int64_t k = 0; k < k_len; ++k)
      if (!key_mask[k]) v[q * k_len + k] = kMaskBias;
  return bias;
}

Tensor causal_bias(int64_t len) {
  Tensor bias = Tensor::zeros({len, len});
  auto& v = bias.values();
  for (int64_t q = 0; q < len; ++q)
    for (int64_t k = q + 1; k < len; ++k) v[q * len + k] = kMaskBias;
  return bias;
}

// ---------------------------------------------------------------------------
// Construction

Model::Model(ModelConfig cfg, uint64_t init_seed) : cfg_(cfg) {
  cfg_.validate();
  const int d = cfg_.model_dim;
  embed_tok_ = params_.create("embed.tok", {cfg_.vocab_size, d});
  embed_audio_tag_ = params_.create("embed.audio_tag", {3, cfg_.feature_dim});
  audio_in_w_ = params_.create("audio.in_proj.w", {cfg_.feature_dim, d});
  audio_in_b_ = params_.create("audio.in_proj.b", {d});
  for (int i = 0; i < cfg_.private_audio_layers(); ++i)
    enc_private_.push_back(
        create_enc_layer("enc.private." + std::to_string(i) + "."));
  for (int i = 0; i < cfg_.text_layers; ++i)
    enc_shared_.push_back(
        create_enc_layer("enc.shared." + std::to_string(i) + "."));
  enc_final_ln_ = create_ln("enc.final_ln.");
  for (int i = 0; i < cfg_.decoder_layers; ++i)
    dec_layers_.push_back(create_dec_layer("dec." + std::to_string(i) + "."));
  dec_final_ln_ = create_ln("dec.final_ln.");
  lang_cat_w_ = params_.create("dec.lang_cat.w", {2 * d, d});
  lang_cat_b_ = params_.create("dec.lang_cat.b", {d});
  init_parameters(init_seed);
  dropout_rng_ = core::Rng(init_seed).child("dropout");
}

Model::AttnParams Model::create_attn(const std::string& prefix) {
  const int d = cfg_.model_dim;
  AttnParams p;
  p.wq = params_.create(prefix + "wq", {d, d});
  p.bq = params_.create(prefix + "bq", {d});
  p.wk = params_.create(prefix + "wk", {d, d});
  p.bk = params_.create(prefix + "bk", {d});
  p.wv = params_.create(prefix + "wv", {d, d});
  p.bv = params_.create(prefix + "bv", {d});
  p.wo = params_.create(prefix + "wo", {d, d});
  p.bo = params_.create(prefix + "bo", {d});
  return p;
}

Model::LnParams Model::create_ln(const std::string& prefix) {
  LnParams p;
  p.g = params_.create(prefix + "g", {cfg_.model_dim});
  p.b = params_.create(prefix + "b", {cfg_.model_dim});
  return p;
}

Model::FfnParams Model::create_ffn(const std::string& prefix) {
  FfnParams p;
  p.w1 = params_.create(prefix + "w1", {cfg_.model_dim, cfg_.inner_dim});
  p.b1 = params_.create(prefix + "b1", {cfg_.inner_dim});
  p.w2 = params_.create(prefix + "w2", {cfg_.inner_dim, cfg_.model_dim});
  p.b2 = params_.create(prefix + "b2", {cfg_.model_dim});
  return p;
}

Model::EncLayer Model::create_enc_layer(const std::string& prefix) {
  EncLayer l;
  l.ln1 = create_ln(prefix + "ln1.");
  l.attn = create_attn(prefix + "attn.");
  l.ln2 = create_ln(prefix + "ln2.");
  l.ffn = create_ffn(prefix + "ffn.");
  return l;
}

Model::DecLayer Model::create_dec_layer(const std::string& prefix) {
  DecLayer l;
  l.ln1 = create_ln(prefix + "ln1.");
  l.self_attn = create_attn(prefix + "self.");
  l.ln2 = create_ln(prefix + "ln2.");
  l.cross_attn = create_attn(prefix + "cross.");
  l.ln3 = create_ln(prefix + "ln3.");
  l.ffn = create_ffn(prefix + "ffn.");
  return l;
}

void Model::init_parameters(uint64_t seed) {
  core::Rng rng = core::Rng(seed).child("init");
  for (auto& [name, t] : params_.entries()) {
    const bool is_embedding = name.rfind("embed.", 0) == 0;
    const bool is_ln_gain =
        name.size() >= 2 && name.compare(name.size() - 2, 2, ".g") == 0;
    if (is_embedding) {
      const double std = 1.0 / std::sqrt(static_cast<double>(t.cols()));
      for (auto& v : t.values()) v = rng.normal(0.0, std);
    } else if (t.rank() == 2) {
      const double bound =
          std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
      for (auto& v : t.values()) v = rng.uniform(-bound, bound);
    } else if (is_ln_gain) {
      std::fill(t.values().begin(), t.values().end(), 1.0);
    }
    // biases stay zero
  }
}

// ---------------------------------------------------------------------------
// Forward pieces

Tensor Model::positional(int64_t len) const {
  const int64_t d = cfg_.model_dim;
  Tensor pe = Tensor::zeros({len, d});
  auto& v = pe.values();
  for (int64_t t = 0; t < len; ++t) {
    for (int64_t i = 0; i < d; i += 2) {
      const double angle =
          static_cast<double>(t) /
          std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d));
      v[t * d + i] = std::sin(angle);
      if (i + 1 < d) v[t * d + i + 1] = std::cos(angle);
    }
  }
  return pe;
}

Tensor Model::maybe_dropout(const Tensor& x, double rate, Mode mode,
                            bool whole_rows) {
  if (mode == Mode::Eval || rate == 0.0) return x;
  return core::dropout(x, rate, dropout_rng_, whole_rows);
}

Tensor Model::attention(const AttnParams& p, const Tensor& queries,
                        const Tensor& keys_values, const Tensor& bias,
                        Mode mode) {
  const int64_t d = cfg_.model_dim;
  const int64_t dh = d / cfg_.heads;
  Tensor q = core::add_rowvec(core::matmul(queries, p.wq), p.bq);
  Tensor k = core::add_rowvec(core::matmul(keys_values, p.wk), p.bk);
  Tensor v = core::add_rowvec(core::matmul(keys_values, p.wv), p.bv);
  Tensor merged;
  for (int h = 0; h < cfg_.heads; ++h) {
    Tensor qh = core::slice_cols(q, h * dh, dh);
    Tensor kh = core::slice_cols(k, h * dh, dh);
    Tensor vh = core::slice_cols(v, h * dh, dh);
    Tensor scores =
        core::scale(core::matmul(qh, core::transpose(kh)),
                    1.0 / std::sqrt(static_cast<double>(dh)));
    if (bias.defined()) scores = core::add(scores, bias);
    Tensor weights = core::softmax(scores, 1);
    weights = maybe_dropout(weights, cfg_.attn_dropout, mode);
    Tensor oh = core::matmul(weights, vh);
    merged = merged.defined() ? core::concat_cols(merged, oh) : oh;
  }
  return core::add_rowvec(core::matmul(merged, p.wo), p.bo);
}

Tensor Model::ffn(const FfnParams& p, const Tensor& x) {
  Tensor h = core::relu(core::add_rowvec(core::matmul(x, p.w1), p.b1));
  return core::add_rowvec(core::matmul(h, p.w2), p.b2);
}

Tensor Model::enc_layer_forward(const EncLayer& layer, const Tensor& x,
                                const Tensor& attn_bias,
                                bool remove_attn_residual, Mode mode) {
  Tensor h = core::layer_norm(x, layer.ln1.g, layer.ln1.b, kLnEps);
  Tensor a = attention(layer.attn, h, h, attn_bias, mode);
  a = maybe_dropout(a, cfg_.dropout, mode);
  Tensor x1 = remove_attn_residual ? a : core::add(x, a);
  Tensor h2 = core::layer_norm(x1, layer.ln2.g, layer.ln2.b, kLnEps);
  Tensor f = maybe_dropout(ffn(layer.ffn, h2), cfg_.dropout, mode);
  return core::add(x1, f);
}

Tensor Model::encoder_shared_stack(Tensor x, const Tensor& bias, Mode mode) {
  for (int i = 0; i < cfg_.text_layers; ++i) {
    const bool depi_here = cfg_.depi && i == cfg_.depi_shared_index();
    x = enc_layer_forward(enc_shared_[i], x, bias, depi_here, mode);
  }
  return core::layer_norm(x, enc_final_ln_.g, enc_final_ln_.b, kLnEps);
}

Tensor Model::run_encoder_layer(bool shared, int index, const Tensor& x,
                                const Tensor& attn_bias, Mode mode) {
  const bool depi_here =
      shared && cfg_.depi && index == cfg_.depi_shared_index();
  return run_encoder_layer_with_residual(shared, index, x, attn_bias,
                                         depi_here, mode);
}

Tensor Model::run_encoder_layer_with_residual(bool shared, int index,
                                              const Tensor& x,
                                              const Tensor& attn_bias,
                                              bool remove_attn_residual,
                                              Mode mode) {
  const auto& layers = shared ? enc_shared_ : enc_private_;
  if (index < 0 || index >= static_cast<int>(layers.size()))
    throw ArgumentError("run_encoder_layer: index out of range");
  return enc_layer_forward(layers[index], x, attn_bias, remove_attn_residual,
                           mode);
}

EncoderOutput Model::encode_text(const std::vector<int>& ids, data::Lang tag,
                                 Mode mode) {
  if (ids.empty()) throw ArgumentError("encode_text: empty token sequence");
  std::vector<int> tagged;
  tagged.reserve(ids.size() + 1);
  tagged.push_back(data::Vocabulary::tag_id(tag));
  tagged.insert(tagged.end(), ids.begin(), ids.end());

  Tensor emb = core::embedding_rows(embed_tok_, tagged);
  emb = core::scale(emb, std::sqrt(static_cast<double>(cfg_.model_dim)));
  emb = maybe_dropout(emb, cfg_.word_dropout, mode, /*whole_rows=*/true);
  emb = maybe_dropout(emb, cfg_.embed_dropout, mode);
  Tensor x = core::add(emb, positional(static_cast<int64_t>(tagged.size())));

  EncoderOutput out;
  out.mask.assign(tagged.size(), 1);
  for (size_t i = 0; i < tagged.size(); ++i)
    if (tagged[i] == data::Vocabulary::kPad) out.mask[i] = 0;
  bool any_masked =
      std::any_of(out.mask.begin(), out.mask.end(), [](uint8_t m) { return !m; });
  Tensor bias;
  if (any_masked)
    bias = key_mask_bias(static_cast<int64_t>(tagged.size()), out.mask);

  out.states = encoder_shared_stack(std::move(x), bias, mode);
  return out;
}

EncoderOutput Model::encode_audio(const data::UtteranceFrames& frames,
                                  data::Lang tag, Mode mode,
                                  const std::vector<uint8_t>* frame_mask) {
  if (frames.dim != cfg_.feature_dim)
    throw ArgumentError("encode_audio: feature dim " +
                        std::to_string(frames.dim) + " != configured " +
                        std::to_string(cfg_.feature_dim));
  if (frames.n_frames < 1)
    throw ArgumentError("encode_audio: empty utterance");
  if (frame_mask &&
      static_cast<int64_t>(frame_mask->size()) != frames.n_frames)
    throw ArgumentError("encode_audio: frame mask length mismatch");

  Tensor raw = Tensor::from_values({frames.n_frames, frames.dim}, frames.data);
  Tensor tag_row = core::embedding_rows(embed_audio_tag_, {audio_tag_row(tag)});
  Tensor with_tag = core::concat_rows(tag_row, raw);
  Tensor x = core::add_rowvec(core::matmul(with_tag, audio_in_w_), audio_in_b_);
  x = maybe_dropout(x, cfg_.embed_dropout, mode);
  x = core::add(x, positional(frames.n_frames + 1));

  EncoderOutput out;
  out.mask.assign(frames.n_frames + 1, 1);
  if (frame_mask)
    for (int64_t i = 0; i < frames.n_frames; ++i)
      out.mask[i + 1] = (*frame_mask)[i];
  bool any_masked =
      std::any_of(out.mask.begin(), out.mask.end(), [](uint8_t m) { return !m; });
  Tensor bias;
  if (any_masked) bias = key_mask_bias(frames.n_frames + 1, out.mask);

  for (auto& layer : enc_private_)
    x = enc_layer_forward(layer, x, bias, /*remove_attn_residual=*/false, mode);
  out.states = encoder_shared_stack(std::move(x), bias, mode);
  return out;
}

Tensor Model::decode(const EncoderOutput& enc, const std::vector<int>& prefix,
                     data::Lang tag, Mode mode) {
  if (prefix.empty()) throw ArgumentError("decode: empty prefix");
  const int64_t len = static_cast<int64_t>(prefix.size());
  Tensor emb = core::embedding_rows(embed_tok_, prefix);
  emb = core::scale(emb, std::sqrt(static_cast<double>(cfg_.model_dim)));
  emb = maybe_dropout(emb, cfg_.word_dropout, mode, /*whole_rows=*/true);

  // The target-language embedding is concatenated to every decoder input,
  // then projected back to model_dim.
  std::vector<int> tag_ids(prefix.size(), data::Vocabulary::tag_id(tag));
  Tensor lang = core::embedding_rows(embed_tok_, tag_ids);
  Tensor x = core::add_rowvec(
      core::matmul(core::concat_cols(emb, lang), lang_cat_w_), lang_cat_b_);
  x = maybe_dropout(x, cfg_.embed_dropout, mode);
  x = core::add(x, positional(len));

  Tensor self_bias = causal_bias(len);
  bool enc_masked = std::any_of(enc.mask.begin(), enc.mask.end(),
                                [](uint8_t m) { return !m; });
  Tensor cross_bias;
  if (enc_masked) cross_bias = key_mask_bias(len, enc.mask);

  for (auto& layer : dec_layers_) {
    Tensor h = core::layer_norm(x, layer.ln1.g, layer.ln1.b, kLnEps);
    Tensor a = attention(layer.self_attn, h, h, self_bias, mode);
    x = core::add(x, maybe_dropout(a, cfg_.dropout, mode));
    Tensor h2 = core::layer_norm(x, layer.ln2.g, layer.ln2.b, kLnEps);
    Tensor c = attention(layer.cross_attn, h2, enc.states, cross_bias, mode);
    x = core::add(x, maybe_dropout(c, cfg_.dropout, mode));
    Tensor h3 = core::layer_norm(x, layer.ln3.g, layer.ln3.b, kLnEps);
    x = core::add(x, maybe_dropout(ffn(layer.ffn, h3), cfg_.dropout, mode));
  }
  x = core::layer_norm(x, dec_final_ln_.g, dec_final_ln_.b, kLnEps);
  return core::matmul(x, core::transpose(embed_tok_));  // tied projection
}

std::vector<int> Model::greedy_decode(const EncoderOutput& enc, data::Lang tag,
                                      int max_len) {
  core::NoGradGuard no_grad;
  std::vector<int> prefix = {data::Vocabulary::kBos};
  std::vector<int> out;
  for (int step = 0; step < max_len; ++step) {
    Tensor logits = decode(enc, prefix, tag, Mode::Eval);
    const int64_t v = logits.cols();
    const int64_t last = (logits.rows() - 1) * v;
    const auto& lv = logits.values();
    int best = 0;
    for (int64_t j = 1; j < v; ++j)
      if (lv[last + j] > lv[last + best]) best = static_cast<int>(j);
    if (best == data::Vocabulary::kEos) break;
    out.push_back(best);
    prefix.push_back(best);
  }
  return out;
}

Tensor Model::mean_pool(const EncoderOutput& enc) {
  return core::masked_mean_rows(enc.states, enc.mask);
}

Tensor Model::aux_loss(const EncoderOutput& text_out,
                       const EncoderOutput& audio_out) {
  if (text_out.states.cols() != audio_out.states.cols())
    throw ContractError("aux_loss: encoder output dims disagree");
  Tensor d = core::sub(mean_pool(text_out), mean_pool(audio_out));
  return core::mean_all(core::mul(d, d));
}

LossParts Model::forward_loss(const Batch& batch, Mode mode) {
  if (batch.samples.empty())
    throw ArgumentError("forward_loss: empty batch");
  LossParts parts;
  int64_t total_tokens = 0;
  for (const auto* s : batch.samples)
    total_tokens += static_cast<int64_t>(s->output_ids.size()) + 1;  // + <eos>
  parts.target_tokens = total_tokens;

  Tensor ce;
  Tensor aux;
  int aux_pairs = 0;
  for (const auto* s : batch.samples) {
    EncoderOutput enc = s->audio_input
                            ? encode_audio(s->frames, s->target_lang, mode)
                            : encode_text(s->input_ids, s->target_lang, mode);
    std::vector<int> prefix;
    prefix.reserve(s->output_ids.size() + 1);
    prefix.push_back(data::Vocabulary::kBos);
    prefix.insert(prefix.end(), s->output_ids.begin(), s->output_ids.end());
    std::vector<int> targets(s->output_ids.begin(), s->output_ids.end());
    targets.push_back(data::Vocabulary::kEos);

    Tensor logits = decode(enc, prefix, s->target_lang, mode);
    Tensor sample_ce = core::cross_entropy_label_smoothed(
        logits, targets, cfg_.label_smoothing, data::Vocabulary::kPad);
    // Token-weighted mean across the batch.
    Tensor weighted = core::scale(
        sample_ce, static_cast<double>(targets.size()) /
                       static_cast<double>(total_tokens));
    ce = ce.defined() ? core::add(ce, weighted) : weighted;

    if (cfg_.aux_weight > 0.0 && batch.asr_like && s->audio_input) {
      EncoderOutput text_enc = encode_text(s->output_ids, s->target_lang, mode);
      Tensor pair = aux_loss(text_enc, enc);
      aux = aux.defined() ? core::add(aux, pair) : pair;
      ++aux_pairs;
    }
  }
  parts.ce = ce;
  parts.aux_pairs = aux_pairs;
  if (aux_pairs > 0) {
    parts.aux = core::scale(aux, 1.0 / static_cast<double>(aux_pairs));
    parts.total = core::add(ce, core::scale(parts.aux, cfg_.aux_weight));
  } else {
    parts.total = ce;
  }
  return parts;
}

}  // namespace zs::model
