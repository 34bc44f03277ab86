// tools/zs.cc
//
// Experiment driver. Subcommands: gen-data, train, finetune, eval, analyze,
// compare. Run `zs <command> --help` for flags.

#include <CLI11.hpp>
#include <iostream>

#include "cli/config_file.h"
#include "cli/presets.h"
#include "cli/runner.h"
#include "core/error.h"
#include "eval/metrics.h"

namespace {

zs::cli::DeskConfig load_config(const std::string& path) {
  if (path.empty()) return zs::cli::DeskConfig{};
  return zs::cli::parse_config_file(path);
}

void print_metrics(const zs::eval::MetricsReport& report) {
  for (const auto& e : report.entries)
    std::printf("%-10s %-18s %10.3f  (n=%lld)\n", e.task.c_str(),
                e.metric.c_str(), e.value, static_cast<long long>(e.count));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale zero-shot speech translation laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, init_from, checkpoint, setting_name = "plain";
  std::string refs_path, hyps_path, metric_name, baseline_dir;
  std::vector<std::string> run_dirs;
  uint64_t seed = 1;
  double data_portion = 1.0, st_portion = 0.1;
  std::string preset_name;
  bool dump_config = false;

  auto* gen = app.add_subcommand(
      "gen-data", "Generate the synthetic corpus manifest and frame sidecar");
  gen->add_option("--config", config_path, "config file (key = value lines)");
  gen->add_option("--seed", seed, "overrides the config data_seed");
  gen->add_option("--out", out_dir, "output directory");
  gen->add_option("--setting", setting_name,
                  "plain|augment-a|augment-b|augment-c|opposite");
  gen->add_flag("--dump-config", dump_config,
                "print the default config and exit");

  auto* tr = app.add_subcommand("train", "Train a preset and evaluate it");
  tr->add_option("--preset", preset_name, "experiment preset")->required();
  tr->add_option("--config", config_path, "config file");
  tr->add_option("--seed", seed, "run seed");
  tr->add_option("--out", out_dir, "run output directory")->required();
  tr->add_option("--init-from", init_from, "checkpoint to initialize from");
  tr->add_option("--data-portion", data_portion,
                 "fraction of the training split (0, 1]");
  tr->add_option("--st-portion", st_portion,
                 "fraction of ST data for fine-tuning presets");

  auto* ft = app.add_subcommand(
      "finetune", "Fine-tune from a checkpoint (early stopping on)");
  ft->add_option("--preset", preset_name, "preset (e.g. ft-st, ft-mix)")
      ->required();
  ft->add_option("--config", config_path, "config file");
  ft->add_option("--seed", seed, "run seed");
  ft->add_option("--out", out_dir, "run output directory")->required();
  ft->add_option("--init-from", init_from, "checkpoint to initialize from")
      ->required();
  ft->add_option("--data-portion", data_portion, "training split fraction");
  ft->add_option("--st-portion", st_portion, "fine-tuning data fraction");

  auto* ev = app.add_subcommand(
      "eval", "Evaluate a checkpoint, or score hyp/ref text files");
  ev->add_option("--checkpoint", checkpoint, "checkpoint to evaluate");
  ev->add_option("--config", config_path, "config file");
  ev->add_option("--out", out_dir, "output directory");
  ev->add_option("--refs", refs_path, "reference text file (one per line)");
  ev->add_option("--hyps", hyps_path, "hypothesis text file (one per line)");
  ev->add_option("--metric", metric_name, "wer|bleu (file mode)");

  auto* an = app.add_subcommand("analyze",
                                "SVCCA / probe analysis of a checkpoint");
  an->add_option("--checkpoint", checkpoint, "checkpoint to analyze")
      ->required();
  an->add_option("--config", config_path, "config file");
  an->add_option("--out", out_dir, "output directory")->required();

  auto* cmp = app.add_subcommand("compare",
                                 "Tabulate metrics across run directories");
  cmp->add_option("dirs", run_dirs, "run directories")->required();
  cmp->add_option("--baseline", baseline_dir,
                  "baseline run for bracketed deltas");
  cmp->add_option("--out", out_dir, "output directory for the report files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (dump_config) {
        std::cout << zs::cli::default_config_text();
        return 0;
      }
      if (out_dir.empty())
        throw zs::ArgumentError("gen-data: --out required");
      auto cfg = load_config(config_path);
      if (gen->count("--seed")) cfg.data_seed = seed;
      zs::cli::generate_corpus_files(
          cfg, zs::data::setting_from_name(setting_name), out_dir);
      std::cout << "corpus written to " << out_dir << "\n";
      return 0;
    }

    if (tr->parsed() || ft->parsed()) {
      zs::cli::RunOptions opts;
      opts.preset = preset_name;
      opts.config_path = config_path;
      opts.seed = seed;
      opts.out_dir = out_dir;
      opts.init_from = init_from;
      opts.data_portion = data_portion;
      opts.st_portion = st_portion;
      auto outcome = zs::cli::run_preset(opts);
      std::cout << "run complete: " << outcome.checkpoint_path
                << " (best epoch " << outcome.train_result.best_epoch
                << ", valid loss " << outcome.train_result.best_valid_loss
                << ")\n";
      print_metrics(outcome.metrics);
      print_metrics(outcome.analysis);
      return 0;
    }

    if (ev->parsed()) {
      if (!refs_path.empty() || !hyps_path.empty()) {
        if (refs_path.empty() || hyps_path.empty() || metric_name.empty())
          throw zs::ArgumentError(
              "eval file mode needs --refs, --hyps and --metric");
        auto refs = zs::eval::read_lines(refs_path);
        auto hyps = zs::eval::read_lines(hyps_path);
        double value;
        if (metric_name == "wer")
          value = zs::eval::wer(refs, hyps);
        else if (metric_name == "bleu")
          value = zs::eval::bleu(refs, hyps);
        else
          throw zs::ArgumentError("unknown metric '" + metric_name +
                                  "' (wer|bleu)");
        std::printf("%s %.3f\n", metric_name.c_str(), value);
        return 0;
      }
      if (checkpoint.empty() || out_dir.empty())
        throw zs::ArgumentError("eval needs --checkpoint and --out");
      auto report = zs::cli::evaluate_checkpoint(checkpoint,
                                                 load_config(config_path),
                                                 out_dir);
      print_metrics(report);
      return 0;
    }

    if (an->parsed()) {
      auto report = zs::cli::analyze_checkpoint(checkpoint,
                                                load_config(config_path),
                                                out_dir);
      print_metrics(report);
      return 0;
    }

    if (cmp->parsed()) {
      const std::string dir = out_dir.empty() ? "." : out_dir;
      const std::string table = zs::cli::write_compare(
          run_dirs, baseline_dir, dir + "/compare.txt",
          dir + "/compare_records.txt");
      std::cout << table;
      return 0;
    }
  } catch (const zs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
