// src/cli/presets.h
//
// The experiment preset catalog mirroring the paper's experiment matrix:
// single-task baselines, cascaded ST, plain zero-shot, DEPI, auxiliary-loss
// weights, augmentation settings (a)/(b)/(c), opposite-direction data,
// combinations, and the few-shot fine-tuning presets.

#pragma once

#include <string>
#include <vector>

#include "data/datasets.h"

namespace zs::cli {

enum class TrainKind {
  SingleAsr,
  SingleMt,
  SingleSt,     // direct end-to-end ST
  Cascade,      // separately trained ASR + MT composed at inference
  MultiTask,    // zero-shot settings (plain / augment / opposite)
  FinetuneSt,   // ST-only fine-tuning (requires --init-from)
  FinetuneMix,  // ASR + MT + ST fine-tuning (requires --init-from)
};

struct ExperimentPreset {
  std::string name;
  TrainKind kind = TrainKind::MultiTask;
  data::Setting setting = data::Setting::Plain;
  double aux_weight = 0.0;
  bool depi = false;
  bool needs_init_from = false;
  const char* description = "";
};

const std::vector<ExperimentPreset>& preset_catalog();

// Throws ArgumentError listing the catalog when the name is unknown.
const ExperimentPreset& find_preset(const std::string& name);

std::string preset_catalog_text();

}  // namespace zs::cli
