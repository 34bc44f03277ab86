// src/train/trainer.cc

#include "train/trainer.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "core/error.h"

namespace zs::train {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

model::Batch make_batch(const data::Dataset& ds, const std::vector<int>& idx) {
  model::Batch batch;
  batch.asr_like = ds.asr_like;
  batch.samples.reserve(idx.size());
  for (int i : idx) batch.samples.push_back(&ds.samples[i]);
  return batch;
}

void clip_gradients(std::vector<core::Tensor>& params, double clip_norm) {
  if (clip_norm <= 0.0) return;
  double sq = 0.0;
  for (auto& p : params)
    for (double g : p.grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm <= clip_norm || norm == 0.0) return;
  const double factor = clip_norm / norm;
  for (auto& p : params)
    for (double& g : p.grad()) g *= factor;
}

}  // namespace

std::vector<TaskLoss> evaluate_datasets(model::Model& model,
                                        const std::vector<data::Dataset>& datasets,
                                        int batch_size) {
  std::vector<TaskLoss> out;
  for (const auto& ds : datasets) {
    if (ds.samples.empty())
      throw ArgumentError("evaluate_datasets: dataset '" + ds.id + "' is empty");
    double weighted = 0.0;
    int64_t tokens = 0;
    for (size_t b = 0; b < ds.samples.size();
         b += static_cast<size_t>(batch_size)) {
      std::vector<int> idx;
      for (size_t i = b;
           i < std::min(ds.samples.size(), b + static_cast<size_t>(batch_size));
           ++i)
        idx.push_back(static_cast<int>(i));
      auto parts = model.forward_loss(make_batch(ds, idx), model::Mode::Eval);
      weighted += parts.total_value() * static_cast<double>(parts.target_tokens);
      tokens += parts.target_tokens;
    }
    out.push_back({ds.direction, weighted / static_cast<double>(tokens), tokens});
  }
  return out;
}

double aggregate_loss(const std::vector<TaskLoss>& tasks) {
  if (tasks.empty()) throw ArgumentError("aggregate_loss: no tasks");
  double sum = 0.0;
  for (const auto& t : tasks) sum += t.loss;
  return sum / static_cast<double>(tasks.size());
}

TrainResult train(model::Model& model,
                  const std::vector<data::Dataset>& train_datasets,
                  const std::vector<data::Dataset>& valid_datasets,
                  const TrainOptions& opts) {
  if (train_datasets.empty())
    throw ArgumentError("train: no training datasets");
  if (valid_datasets.empty())
    throw ArgumentError("train: no validation datasets");
  if (opts.max_epochs < 1) throw ArgumentError("train: max_epochs < 1");

  core::Rng run_rng(opts.seed);
  model.reseed_dropout(run_rng.child("dropout").next_u64());

  auto params = model.params().tensors();
  core::AdamConfig adam_cfg = opts.adam;
  adam_cfg.model_dim = model.config().model_dim;
  core::AdamState adam(adam_cfg, params);

  TrainResult result;
  std::vector<std::vector<double>> best_params;
  EarlyStopper stopper(opts.patience);

  for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    const auto t0 = Clock::now();
    auto schedule = data::schedule_batches(
        train_datasets, opts.batch_size,
        run_rng.child("epoch-" + std::to_string(epoch)).next_u64());

    std::map<std::string, std::pair<double, int64_t>> task_train;  // loss, tokens
    for (const auto& ref : schedule.order) {
      const auto& ds = train_datasets[ref.dataset];
      auto batch = make_batch(ds, schedule.batches[ref.dataset][ref.batch]);
      model.params().zero_grad();
      model::LossParts parts;
      try {
        parts = model.forward_loss(batch, model::Mode::Train);
        core::backward(parts.total);
      } catch (const NumericError& e) {
        throw NumericError("train: non-finite loss in epoch " +
                           std::to_string(epoch) + ", dataset '" + ds.id +
                           "', batch " + std::to_string(ref.batch) + ": " +
                           e.what());
      }
      clip_gradients(params, opts.clip_norm);
      adam.step_update(params);
      ++result.steps;

      auto& acc = task_train[ds.direction];
      acc.first += parts.total_value() * static_cast<double>(parts.target_tokens);
      acc.second += parts.target_tokens;
    }

    const double wall = seconds_since(t0);
    for (const auto& [task, acc] : task_train)
      result.log.push_back(
          {epoch, task, "train", acc.first / static_cast<double>(acc.second),
           wall});

    auto valid = evaluate_datasets(model, valid_datasets, opts.batch_size);
    const double agg = aggregate_loss(valid);
    for (const auto& t : valid)
      result.log.push_back({epoch, t.task, "valid", t.loss, wall});
    result.log.push_back({epoch, "all", "valid", agg, wall});
    result.epochs_run = epoch;

    const bool stop = stopper.observe(epoch, agg);
    if (stopper.improved()) {
      best_params.clear();
      for (auto& p : params) best_params.push_back(p.values());
    }
    if (stop) break;
  }
  result.best_epoch = stopper.best_epoch();
  result.best_valid_loss = stopper.best_loss();

  // Hand back the checkpointed (lowest validation loss) parameters.
  for (size_t i = 0; i < params.size(); ++i) params[i].values() = best_params[i];
  return result;
}

TrainResult finetune(model::Model& model,
                     const std::vector<data::Dataset>& train_datasets,
                     const std::vector<data::Dataset>& valid_datasets,
                     TrainOptions opts) {
  if (train_datasets.empty())
    throw ArgumentError("finetune: empty fine-tuning data");
  for (const auto& ds : train_datasets)
    if (ds.samples.empty())
      throw ArgumentError("finetune: empty fine-tuning dataset '" + ds.id + "'");
  if (opts.patience < 1) opts.patience = 1;
  // Fresh Adam state and warmup (optimizer state is reset for fine-tuning).
  return train(model, train_datasets, valid_datasets, opts);
}

void write_train_log(const std::string& path, const std::vector<LogEntry>& log) {
  std::ofstream os(path);
  if (!os) throw ArgumentError("cannot open train log for writing: " + path);
  char buf[256];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof(buf),
                  "epoch=%d task=%s split=%s loss=%.10f wall=%.3f", e.epoch,
                  e.task.c_str(), e.split.c_str(), e.loss, e.wall_seconds);
    os << buf << '\n';
  }
}

}  // namespace zs::train
