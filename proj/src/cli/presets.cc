// src/cli/presets.cc

#include "cli/presets.h"

#include <sstream>

#include "core/error.h"

namespace zs::cli {

const std::vector<ExperimentPreset>& preset_catalog() {
  using data::Setting;
  static const std::vector<ExperimentPreset> kCatalog = {
      {"single-asr", TrainKind::SingleAsr, Setting::Plain, 0, false, false,
       "ASR only: SRC-audio -> SRC-text"},
      {"single-mt", TrainKind::SingleMt, Setting::Plain, 0, false, false,
       "MT only: SRC-text -> TGT-text"},
      {"single-st", TrainKind::SingleSt, Setting::Plain, 0, false, false,
       "direct end-to-end ST: SRC-audio -> TGT-text"},
      {"cascade", TrainKind::Cascade, Setting::Plain, 0, false, false,
       "separately trained ASR and MT composed at inference"},
      {"plain-zs", TrainKind::MultiTask, Setting::Plain, 0, false, false,
       "zero-shot: ASR + MT multi-task"},
      {"depi", TrainKind::MultiTask, Setting::Plain, 0, true, false,
       "plain zero-shot with the middle shared layer's residual removed"},
      {"aux-0.1", TrainKind::MultiTask, Setting::Plain, 0.1, false, false,
       "plain zero-shot + auxiliary alignment loss, weight 0.1"},
      {"aux-1.0", TrainKind::MultiTask, Setting::Plain, 1.0, false, false,
       "plain zero-shot + auxiliary alignment loss, weight 1.0"},
      {"aux-5.0", TrainKind::MultiTask, Setting::Plain, 5.0, false, false,
       "plain zero-shot + auxiliary alignment loss, weight 5.0"},
      {"augment-a", TrainKind::MultiTask, Setting::AugmentA, 0, false, false,
       "augmented data (a): audio/text -> SRC-R"},
      {"augment-b", TrainKind::MultiTask, Setting::AugmentB, 0, false, false,
       "augmented data (b): SRC-R -> SRC/TGT"},
      {"augment-c", TrainKind::MultiTask, Setting::AugmentC, 0, false, false,
       "augmented data (c): union of (a) and (b)"},
      {"opposite", TrainKind::MultiTask, Setting::Opposite, 0, false, false,
       "additional opposite-direction ASR and MT data"},
      {"opposite-aux", TrainKind::MultiTask, Setting::Opposite, 5.0, false,
       false, "opposite data + auxiliary loss (weight 5)"},
      {"augment-aux", TrainKind::MultiTask, Setting::AugmentC, 5.0, false,
       false, "augmented data (c) + auxiliary loss (weight 5)"},
      {"ft-st", TrainKind::FinetuneSt, Setting::Plain, 0, false, true,
       "fine-tune a checkpoint on ST data only (--st-portion)"},
      {"ft-mix", TrainKind::FinetuneMix, Setting::Plain, 0, false, true,
       "fine-tune a checkpoint on ASR + MT + ST data (--st-portion each)"},
  };
  return kCatalog;
}

std::string preset_catalog_text() {
  std::ostringstream os;
  for (const auto& p : preset_catalog())
    os << "  " << p.name << " - " << p.description << "\n";
  return os.str();
}

const ExperimentPreset& find_preset(const std::string& name) {
  for (const auto& p : preset_catalog())
    if (p.name == name) return p;
  throw ArgumentError("unknown preset '" + name + "'; available presets:\n" +
                      preset_catalog_text());
}

}  // namespace zs::cli
