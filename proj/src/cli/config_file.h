// src/cli/config_file.h
//
// Desk-scale run configuration: key = value lines, '#' comments. Unknown
// keys are errors so typos cannot silently fall back to defaults.

#pragma once

#include <cstdint>
#include <string>

namespace zs::cli {

struct DeskConfig {
  // corpus
  int corpus_size = 320;
  int lexicon_size = 48;
  double cognate_fraction = 0.2;
  int sent_len_min = 2;
  int sent_len_max = 5;
  int word_len_min = 2;
  int word_len_max = 5;
  uint64_t data_seed = 12345;
  int feature_dim = 8;
  double noise_sigma = 0.1;

  // model
  int audio_layers = 4;
  int text_layers = 2;
  int decoder_layers = 2;
  int model_dim = 32;
  int inner_dim = 64;
  int heads = 2;
  double dropout = 0.1;
  double attn_dropout = 0.1;
  double word_dropout = 0.05;
  double embed_dropout = 0.05;
  double label_smoothing = 0.1;

  // training
  int max_epochs = 48;
  int ft_max_epochs = 30;
  int patience = 1;
  int batch_size = 8;
  int64_t warmup_steps = 300;
  double adam_base_factor = 0.4;
  double clip_norm = 1.0;

  // evaluation / analysis
  int eval_max_len = 80;
  int analysis_max_sentences = 400;
  double svcca_variance_kept = 0.99;
  int probe_iterations = 400;
  double probe_learning_rate = 0.5;

  void validate() const;
};

DeskConfig parse_config_text(const std::string& text,
                             const std::string& origin);
DeskConfig parse_config_file(const std::string& path);

// The default configuration rendered as a config file (for gen-data --dump
// and for documenting the key set).
std::string default_config_text();

uint64_t fnv1a(const std::string& data);

}  // namespace zs::cli
