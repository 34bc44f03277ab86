// src/analysis/statedump.h
//
// Aligned encoder-state exports. A StateDump holds two state matrices of one
// model over two views of the same sentences: mean-pooled rows (aligned by
// sentence, equal row counts) for SVCCA, or unpooled token rows (one row per
// token, X = first view's tokens, Y = second view's) for the probe.
//
// File format "ZSSD", version 1, little-endian:
//   magic, u32 version, u64 n_x, u64 n_y, u64 d,
//   u16-length-prefixed view names (x then y),
//   row-major float32 block X (n_x * d), block Y (n_y * d).

#pragma once

#include <string>
#include <vector>

#include "analysis/linalg.h"
#include "data/corpus.h"
#include "data/datasets.h"
#include "model/transformer.h"

namespace zs::analysis {

struct StateDump {
  std::string view_x;
  std::string view_y;
  Mat x;
  Mat y;
};

void write_state_dump(const std::string& path, const StateDump& dump);
StateDump read_state_dump(const std::string& path);

// One encode pass of one side of a sentence pair: which sentence, which
// modality, and which target-language tag to condition on.
struct View {
  bool audio = false;
  data::Lang side = data::Lang::SRC;  // which sentence of the pair
  data::Lang tag = data::Lang::SRC;   // target-language token at encode time
  std::string name() const;
};

struct ExportOptions {
  double noise_sigma = 0.1;
  int feature_dim = 8;
  uint64_t render_seed = 0xe7a1;
  // Probe exports drop the prepended tag position so only content tokens
  // are classified.
  bool exclude_tag_position = true;
};

struct ExportResult {
  StateDump dump;
  int64_t skipped = 0;  // sentences where a view was unavailable
};

// Row i of each matrix is the mean-pooled encoder output of views a and b
// of pair i; rows stay aligned (a pair with any failing view is skipped).
ExportResult export_pooled_states(model::Model& model,
                                  const std::vector<data::SentencePair>& pairs,
                                  const View& a, const View& b,
                                  const data::Vocabulary& vocab,
                                  const ExportOptions& opts);

// Unpooled token states of both views: X gathers view a's token rows, Y
// view b's (row counts differ).
ExportResult export_token_states(model::Model& model,
                                 const std::vector<data::SentencePair>& pairs,
                                 const View& a, const View& b,
                                 const data::Vocabulary& vocab,
                                 const ExportOptions& opts);

}  // namespace zs::analysis
