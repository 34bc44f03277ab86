// src/train/trainer.h
//
// Multi-task training loop: per-epoch batch interleaving, Adam with warmup,
// gradient-norm clipping, per-task loss logging, checkpoint selection by
// validation loss, and early stopping for fine-tuning.

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "core/adam.h"
#include "data/datasets.h"
#include "model/transformer.h"

namespace zs::train {

struct TrainOptions {
  int max_epochs = 24;
  int batch_size = 8;
  uint64_t seed = 1;
  double clip_norm = 1.0;  // <= 0 disables clipping
  // Number of consecutive epochs without validation improvement tolerated
  // before stopping; 0 disables early stopping (plain training runs the
  // full epoch budget).
  int patience = 0;
  core::AdamConfig adam;
};

struct LogEntry {
  int epoch = 0;
  std::string task;   // dataset direction, or "all" for the aggregate
  std::string split;  // "train" / "valid"
  double loss = 0.0;
  double wall_seconds = 0.0;
};

struct TaskLoss {
  std::string task;
  double loss = 0.0;
  int64_t tokens = 0;
};

struct TrainResult {
  int best_epoch = 0;
  double best_valid_loss = 0.0;
  int epochs_run = 0;
  int64_t steps = 0;
  std::vector<LogEntry> log;
};

// Stops at the first run of `patience` epochs whose validation loss does not
// improve on the best seen so far (patience 0 never stops).
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  // Returns true when training should stop after this epoch.
  bool observe(int epoch, double valid_loss) {
    if (valid_loss < best_) {
      best_ = valid_loss;
      best_epoch_ = epoch;
      streak_ = 0;
      improved_ = true;
      return false;
    }
    improved_ = false;
    ++streak_;
    return patience_ > 0 && streak_ >= patience_;
  }

  bool improved() const { return improved_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  int patience_;
  int streak_ = 0;
  int best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
  bool improved_ = false;
};

// Token-weighted mean loss per dataset, evaluation mode.
std::vector<TaskLoss> evaluate_datasets(model::Model& model,
                                        const std::vector<data::Dataset>& datasets,
                                        int batch_size);

// Unweighted mean of per-task mean losses.
double aggregate_loss(const std::vector<TaskLoss>& tasks);

// Trains in place; on return the model holds the parameters of the epoch
// with the lowest validation loss.
TrainResult train(model::Model& model,
                  const std::vector<data::Dataset>& train_datasets,
                  const std::vector<data::Dataset>& valid_datasets,
                  const TrainOptions& opts);

// Fine-tuning: early stopping on (patience defaults to 1 when unset).
TrainResult finetune(model::Model& model,
                     const std::vector<data::Dataset>& train_datasets,
                     const std::vector<data::Dataset>& valid_datasets,
                     TrainOptions opts);

void write_train_log(const std::string& path, const std::vector<LogEntry>& log);

}  // namespace zs::train
