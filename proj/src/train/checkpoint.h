// src/train/checkpoint.h
//
// Binary checkpoint: magic "ZSXL", format version, model config and
// vocabulary, a parameter manifest (name, shape, offset), raw little-endian
// float32 blobs, optional Adam state, epoch and validation loss. Round trip
// is bit-exact at 32-bit precision; files are written atomically.

#pragma once

#include <memory>
#include <optional>
#include <string>

#include "core/adam.h"
#include "data/vocab.h"
#include "model/transformer.h"

namespace zs::train {

struct OptimizerBlob {
  core::AdamConfig config;
  int64_t step = 0;
  std::vector<std::vector<double>> first_moments;
  std::vector<std::vector<double>> second_moments;
};

struct LoadedCheckpoint {
  model::ModelConfig config;
  data::Vocabulary vocab;
  std::unique_ptr<model::Model> model;
  std::optional<OptimizerBlob> optimizer;
  int epoch = 0;
  double valid_loss = 0.0;
};

void save_checkpoint(const model::Model& model, const data::Vocabulary& vocab,
                     const std::string& path, int epoch, double valid_loss,
                     const core::AdamState* optimizer = nullptr);

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace zs::train
