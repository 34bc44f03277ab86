// src/model/config.h

#pragma once

#include <map>
#include <string>

#include "core/error.h"

namespace zs::model {

// Architecture hyperparameters. Paper-scale values in comments; desk
// presets scale everything down while keeping audio_layers > text_layers
// and full sharing of the text stack.
struct ModelConfig {
  int audio_layers = 4;    // total audio encoder layers (32 at paper scale)
  int text_layers = 2;     // all shared with the top audio layers (12)
  int decoder_layers = 2;  // (12)
  int model_dim = 32;      // (512)
  int inner_dim = 64;      // (2048)
  int heads = 2;
  double dropout = 0.2;
  double attn_dropout = 0.2;
  double word_dropout = 0.1;
  double embed_dropout = 0.1;
  double label_smoothing = 0.1;
  double aux_weight = 0.0;  // lambda
  bool depi = false;
  int feature_dim = 8;  // pseudo-audio D
  int vocab_size = 0;

  int private_audio_layers() const { return audio_layers - text_layers; }

  // 0-based index of the residual-removal layer within the shared stack:
  // ceil(text_layers / 2) counting from one.
  int depi_shared_index() const { return (text_layers + 1) / 2 - 1; }

  void validate() const {
    if (audio_layers < 1 || text_layers < 1 || decoder_layers < 1)
      throw ArgumentError("config: layer counts must be positive");
    if (text_layers > audio_layers)
      throw ArgumentError(
          "config: text_encoder_layers must not exceed audio_encoder_layers");
    if (model_dim < 1 || inner_dim < 1 || feature_dim < 1)
      throw ArgumentError("config: dimensions must be positive");
    if (heads < 1 || model_dim % heads != 0)
      throw ArgumentError("config: model_dim must be divisible by heads");
    if (aux_weight < 0.0)
      throw ArgumentError("config: aux loss weight must be >= 0");
    if (vocab_size < 1) throw ArgumentError("config: vocab_size unset");
    for (double r : {dropout, attn_dropout, word_dropout, embed_dropout})
      if (r < 0.0 || r >= 1.0)
        throw ArgumentError("config: dropout rates must be in [0, 1)");
    if (label_smoothing < 0.0 || label_smoothing >= 1.0)
      throw ArgumentError("config: label smoothing must be in [0, 1)");
  }

  std::map<std::string, std::string> to_kv() const;
  static ModelConfig from_kv(const std::map<std::string, std::string>& kv);
};

}  // namespace zs::model
