// src/model/transformer.h
//
// The dual-encoder transformer: a private bottom stack for audio, a text
// encoder physically shared with the top audio layers, and an attention
// decoder whose inputs are concatenated with the target-language embedding.
// Target-language tokens are prepended to every input (a vocabulary token
// for text, a learned feature-space frame for audio).

#pragma once

#include <string>
#include <vector>

#include "core/adam.h"
#include "core/rng.h"
#include "core/tensor.h"
#include "data/datasets.h"
#include "data/vocab.h"
#include "model/config.h"

namespace zs::model {

enum class Mode { Train, Eval };

struct EncoderOutput {
  core::Tensor states;        // T x model_dim
  std::vector<uint8_t> mask;  // 1 = real (non-pad) position
};

class ParameterStore {
 public:
  core::Tensor create(const std::string& name, core::Shape shape);
  core::Tensor& get(const std::string& name);
  const core::Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<std::pair<std::string, core::Tensor>>& entries() const {
    return entries_;
  }
  std::vector<std::pair<std::string, core::Tensor>>& entries() {
    return entries_;
  }
  std::vector<core::Tensor> tensors() const;
  void zero_grad();
  int64_t total_size() const;

 private:
  std::vector<std::pair<std::string, core::Tensor>> entries_;
  std::map<std::string, size_t> index_;
};

struct Batch {
  std::vector<const data::Sample*> samples;
  bool asr_like = false;  // outputs are the transcripts of the audio inputs
};

struct LossParts {
  core::Tensor total;
  core::Tensor ce;
  core::Tensor aux;  // undefined when no pair contributed
  int64_t target_tokens = 0;
  int aux_pairs = 0;

  double total_value() const { return total.item(); }
  double ce_value() const { return ce.item(); }
  double aux_value() const { return aux.defined() ? aux.item() : 0.0; }
};

class Model {
 public:
  Model(ModelConfig cfg, uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  void reseed_dropout(uint64_t seed) { dropout_rng_ = core::Rng(seed); }

  EncoderOutput encode_text(const std::vector<int>& ids, data::Lang tag,
                            Mode mode = Mode::Eval);
  // frame_mask, when given, marks real frames (tests use it to exercise
  // padding invariance); the prepended tag frame is always real.
  EncoderOutput encode_audio(const data::UtteranceFrames& frames,
                             data::Lang tag, Mode mode = Mode::Eval,
                             const std::vector<uint8_t>* frame_mask = nullptr);

  // Teacher-forced logits over the whole prefix, (prefix length) x V.
  core::Tensor decode(const EncoderOutput& enc, const std::vector<int>& prefix,
                      data::Lang tag, Mode mode = Mode::Eval);

  std::vector<int> greedy_decode(const EncoderOutput& enc, data::Lang tag,
                                 int max_len);

  // Mean over unmasked time steps, 1 x model_dim.
  static core::Tensor mean_pool(const EncoderOutput& enc);
  // Mean over dims of the squared difference of the two pooled vectors.
  static core::Tensor aux_loss(const EncoderOutput& text_out,
                               const EncoderOutput& audio_out);

  // total = ce + aux_weight * aux; aux is computed only on asr-like batches
  // (audio paired with its transcript through the text encoder).
  LossParts forward_loss(const Batch& batch, Mode mode);

  // One encoder layer as configured (residual removal only at the middle
  // shared layer when depi is enabled). Exposed for layer-level tests.
  core::Tensor run_encoder_layer(bool shared, int index, const core::Tensor& x,
                                 const core::Tensor& attn_bias, Mode mode);
  // The depi seam: the same layer with explicit control of the
  // self-attention residual.
  core::Tensor run_encoder_layer_with_residual(bool shared, int index,
                                               const core::Tensor& x,
                                               const core::Tensor& attn_bias,
                                               bool remove_attn_residual,
                                               Mode mode);

 private:
  struct AttnParams {
    core::Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  };
  struct LnParams {
    core::Tensor g, b;
  };
  struct FfnParams {
    core::Tensor w1, b1, w2, b2;
  };
  struct EncLayer {
    LnParams ln1;
    AttnParams attn;
    LnParams ln2;
    FfnParams ffn;
  };
  struct DecLayer {
    LnParams ln1;
    AttnParams self_attn;
    LnParams ln2;
    AttnParams cross_attn;
    LnParams ln3;
    FfnParams ffn;
  };

  AttnParams create_attn(const std::string& prefix);
  LnParams create_ln(const std::string& prefix);
  FfnParams create_ffn(const std::string& prefix);
  EncLayer create_enc_layer(const std::string& prefix);
  DecLayer create_dec_layer(const std::string& prefix);
  void init_parameters(uint64_t seed);

  core::Tensor attention(const AttnParams& p, const core::Tensor& queries,
                         const core::Tensor& keys_values,
                         const core::Tensor& bias, Mode mode);
  core::Tensor ffn(const FfnParams& p, const core::Tensor& x);
  core::Tensor enc_layer_forward(const EncLayer& layer, const core::Tensor& x,
                                 const core::Tensor& attn_bias,
                                 bool remove_attn_residual, Mode mode);
  core::Tensor encoder_shared_stack(core::Tensor x, const core::Tensor& bias,
                                    Mode mode);
  core::Tensor positional(int64_t len) const;
  core::Tensor maybe_dropout(const core::Tensor& x, double rate, Mode mode,
                             bool whole_rows = false);

  ModelConfig cfg_;
  ParameterStore params_;
  core::Rng dropout_rng_{1};

  core::Tensor embed_tok_;        // V x d (tied with the output projection)
  core::Tensor embed_audio_tag_;  // 3 x D
  core::Tensor audio_in_w_, audio_in_b_;
  std::vector<EncLayer> enc_private_;
  std::vector<EncLayer> enc_shared_;
  LnParams enc_final_ln_;
  std::vector<DecLayer> dec_layers_;
  LnParams dec_final_ln_;
  core::Tensor lang_cat_w_, lang_cat_b_;
};

// 0 / -1e9 bias matrices for masked attention.
core::Tensor key_mask_bias(int64_t q_len, const std::vector<uint8_t>& key_mask);
core::Tensor causal_bias(int64_t len);

}  // namespace zs::model
