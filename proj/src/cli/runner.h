// src/cli/runner.h
//
// Preset execution: corpus generation, training (or fine-tuning from a
// checkpoint), evaluation, representation analysis, and the comparison
// report. Every run writes a manifest sufficient to reproduce it.

#pragma once

#include <string>
#include <vector>

#include "cli/config_file.h"
#include "cli/presets.h"
#include "data/corpus.h"
#include "data/datasets.h"
#include "data/vocab.h"
#include "eval/metrics.h"
#include "train/trainer.h"

namespace zs::cli {

struct RunOptions {
  std::string preset;
  std::string config_path;  // empty = built-in defaults
  uint64_t seed = 1;
  std::string out_dir;
  std::string init_from;     // checkpoint path for fine-tuning / chaining
  double data_portion = 1.0;
  double st_portion = 0.1;
};

struct RunOutcome {
  eval::MetricsReport metrics;
  eval::MetricsReport analysis;
  std::string checkpoint_path;
  train::TrainResult train_result;
};

RunOutcome run_preset(const RunOptions& opts);

// Shared corpus/vocabulary construction (all presets on the same config see
// identical data).
struct World {
  DeskConfig cfg;
  data::ParallelCorpus corpus;
  data::Vocabulary vocab;
};
World build_world(const DeskConfig& cfg);

// Evaluation / analysis of an existing checkpoint against the config corpus.
eval::MetricsReport evaluate_checkpoint(const std::string& checkpoint_path,
                                        const DeskConfig& cfg,
                                        const std::string& out_dir);
eval::MetricsReport analyze_checkpoint(const std::string& checkpoint_path,
                                       const DeskConfig& cfg,
                                       const std::string& out_dir);

// gen-data: corpus manifest + frames sidecar + lexicon + vocabulary files.
void generate_corpus_files(const DeskConfig& cfg, data::Setting setting,
                           const std::string& out_dir);

// Comparison table over run directories; when `baseline_dir` is non-empty,
// every other run's cells carry a bracketed delta against it. Writes an
// aligned plaintext table and line-structured records; returns the table.
std::string write_compare(const std::vector<std::string>& run_dirs,
                          const std::string& baseline_dir,
                          const std::string& out_table_path,
                          const std::string& out_records_path);

}  // namespace zs::cli
