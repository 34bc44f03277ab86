// src/cli/runner.cc

#include "cli/runner.h"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "analysis/probe.h"
#include "analysis/statedump.h"
#include "analysis/svcca.h"
#include "core/error.h"
#include "eval/evaluator.h"
#include "train/checkpoint.h"

namespace zs::cli {

namespace fs = std::filesystem;

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::vector<std::string> all_texts(const data::ParallelCorpus& corpus) {
  std::vector<std::string> texts;
  for (const auto* split : {&corpus.train, &corpus.valid, &corpus.test}) {
    for (const auto& p : *split) {
      texts.push_back(p.src.text);
      texts.push_back(p.tgt.text);
      texts.push_back(data::reverse_language(p.src).text);
    }
  }
  return texts;
}

uint64_t corpus_hash(const data::ParallelCorpus& corpus) {
  std::string joined;
  for (const auto& t : all_texts(corpus)) {
    joined += t;
    joined.push_back('\n');
  }
  return fnv1a(joined);
}

model::ModelConfig model_config_for(const DeskConfig& cfg,
                                    const ExperimentPreset& preset,
                                    int vocab_size) {
  model::ModelConfig mc;
  mc.audio_layers = cfg.audio_layers;
  mc.text_layers = cfg.text_layers;
  mc.decoder_layers = cfg.decoder_layers;
  mc.model_dim = cfg.model_dim;
  mc.inner_dim = cfg.inner_dim;
  mc.heads = cfg.heads;
  mc.dropout = cfg.dropout;
  mc.attn_dropout = cfg.attn_dropout;
  mc.word_dropout = cfg.word_dropout;
  mc.embed_dropout = cfg.embed_dropout;
  mc.label_smoothing = cfg.label_smoothing;
  mc.aux_weight = preset.aux_weight;
  mc.depi = preset.depi;
  mc.feature_dim = cfg.feature_dim;
  mc.vocab_size = vocab_size;
  mc.validate();
  return mc;
}

data::AssembleOptions assemble_options(const DeskConfig& cfg) {
  data::AssembleOptions a;
  a.noise_sigma = cfg.noise_sigma;
  a.feature_dim = cfg.feature_dim;
  a.seed = cfg.data_seed;
  return a;
}

// Training pairs after --data-portion; the subset is seeded by the data
// seed so every preset on the same config sees the same subset.
std::vector<data::SentencePair> portion_pairs(const World& world,
                                              double portion) {
  if (portion >= 1.0) return world.corpus.train;
  return data::take_portion(world.corpus.train, portion,
                            world.cfg.data_seed ^ 0x9e77);
}

struct DataPlan {
  std::vector<data::Dataset> train;
  std::vector<data::Dataset> valid;
};

DataPlan datasets_for(const ExperimentPreset& preset, const World& world,
                      const RunOptions& opts) {
  const auto aopts = assemble_options(world.cfg);
  const auto train_pairs = portion_pairs(world, opts.data_portion);
  const auto& valid_pairs = world.corpus.valid;
  using data::Direction;
  DataPlan plan;
  auto one = [&](Direction dir, const std::vector<data::SentencePair>& pairs) {
    return data::build_direction_dataset(dir, pairs, world.vocab, aopts);
  };
  switch (preset.kind) {
    case TrainKind::SingleAsr:
      plan.train = {one(Direction::SrcAudioToSrcText, train_pairs)};
      plan.valid = {one(Direction::SrcAudioToSrcText, valid_pairs)};
      break;
    case TrainKind::SingleMt:
      plan.train = {one(Direction::SrcTextToTgtText, train_pairs)};
      plan.valid = {one(Direction::SrcTextToTgtText, valid_pairs)};
      break;
    case TrainKind::SingleSt:
      plan.train = {one(Direction::SrcAudioToTgtText, train_pairs)};
      plan.valid = {one(Direction::SrcAudioToTgtText, valid_pairs)};
      break;
    case TrainKind::MultiTask:
      plan.train = data::assemble_training_set(train_pairs, preset.setting,
                                               world.vocab, aopts);
      plan.valid = data::assemble_training_set(valid_pairs, preset.setting,
                                               world.vocab, aopts);
      break;
    case TrainKind::FinetuneSt: {
      const auto st_pairs = data::take_portion(
          train_pairs, opts.st_portion, world.cfg.data_seed ^ 0x57);
      plan.train = {one(Direction::SrcAudioToTgtText, st_pairs)};
      plan.valid = {one(Direction::SrcAudioToTgtText, valid_pairs)};
      break;
    }
    case TrainKind::FinetuneMix: {
      const auto mix_pairs = data::take_portion(
          train_pairs, opts.st_portion, world.cfg.data_seed ^ 0x57);
      plan.train = {one(Direction::SrcAudioToSrcText, mix_pairs),
                    one(Direction::SrcTextToTgtText, mix_pairs),
                    one(Direction::SrcAudioToTgtText, mix_pairs)};
      plan.valid = {one(Direction::SrcAudioToSrcText, valid_pairs),
                    one(Direction::SrcTextToTgtText, valid_pairs),
                    one(Direction::SrcAudioToTgtText, valid_pairs)};
      break;
    }
    case TrainKind::Cascade:
      throw ContractError("datasets_for: cascade resolves its own datasets");
  }
  return plan;
}

train::TrainOptions train_options(const DeskConfig& cfg, uint64_t seed,
                                  bool finetuning) {
  train::TrainOptions t;
  t.max_epochs = finetuning ? cfg.ft_max_epochs : cfg.max_epochs;
  t.batch_size = cfg.batch_size;
  t.seed = seed;
  t.clip_norm = cfg.clip_norm;
  t.patience = finetuning ? cfg.patience : 0;
  t.adam.base_factor = cfg.adam_base_factor;
  t.adam.warmup_steps = cfg.warmup_steps;
  return t;
}

// Builds a model for this preset, optionally splicing in parameter values
// from an initializing checkpoint (shapes must agree; the preset's aux/depi
// flags still apply).
std::unique_ptr<model::Model> build_model(const World& world,
                                          const ExperimentPreset& preset,
                                          const RunOptions& opts) {
  auto mc = model_config_for(world.cfg, preset, world.vocab.size());
  auto m = std::make_unique<model::Model>(mc, opts.seed);
  if (!opts.init_from.empty()) {
    auto loaded = train::load_checkpoint(opts.init_from);
    if (loaded.vocab.chars() != world.vocab.chars())
      throw ArgumentError(
          "init-from checkpoint vocabulary differs from the config corpus");
    auto& dst = m->params().entries();
    const auto& src = loaded.model->params().entries();
    if (dst.size() != src.size())
      throw IntegrityError("init-from checkpoint has a different architecture");
    for (size_t i = 0; i < dst.size(); ++i) {
      if (dst[i].first != src[i].first ||
          dst[i].second.shape() != src[i].second.shape())
        throw IntegrityError("init-from parameter mismatch at '" +
                             dst[i].first + "'");
      dst[i].second.values() = src[i].second.values();
    }
  }
  return m;
}

eval::DecodeOptions decode_options(const DeskConfig& cfg) {
  eval::DecodeOptions d;
  d.max_len = cfg.eval_max_len;
  d.noise_sigma = cfg.noise_sigma;
  d.feature_dim = cfg.feature_dim;
  return d;
}

void write_hyp_ref(const std::string& out_dir, const std::string& task,
                   const eval::EvalTexts& texts) {
  eval::write_lines(join_path(out_dir, "hyp_" + task + ".txt"),
                    texts.hypotheses);
  eval::write_lines(join_path(out_dir, "ref_" + task + ".txt"),
                    texts.references);
}

void add_token_stats(eval::MetricsReport& report, const World& world,
                     const std::vector<std::string>& hyps) {
  const auto& lex = world.corpus.lexicon;
  std::set<std::string> src(lex.src_words.begin(), lex.src_words.end());
  std::set<std::string> tgt(lex.tgt_words.begin(), lex.tgt_words.end());
  const auto reversed = lex.reversed_src_words();
  std::set<std::string> srcr(reversed.begin(), reversed.end());
  auto stats = eval::token_language_stats(hyps, src, tgt, srcr);
  report.add("st", "tokens_both", stats.both_pct, stats.counted);
  report.add("st", "tokens_src_only", stats.src_only_pct, stats.counted);
  report.add("st", "tokens_tgt_only", stats.tgt_only_pct, stats.counted);
}

eval::MetricsReport evaluate_model(model::Model& m, const World& world,
                                   TrainKind kind, const std::string& out_dir) {
  using data::Direction;
  const auto dopts = decode_options(world.cfg);
  const auto& test = world.corpus.test;
  eval::MetricsReport report;
  const bool multi = kind == TrainKind::MultiTask ||
                     kind == TrainKind::FinetuneSt ||
                     kind == TrainKind::FinetuneMix;

  if (kind == TrainKind::SingleAsr || multi) {
    auto texts = eval::decode_direction(m, test, Direction::SrcAudioToSrcText,
                                        world.vocab, dopts);
    report.add("asr", "wer", eval::wer(texts.references, texts.hypotheses),
               static_cast<int64_t>(test.size()));
    write_hyp_ref(out_dir, "asr", texts);
  }
  if (kind == TrainKind::SingleMt || multi) {
    auto texts = eval::decode_direction(m, test, Direction::SrcTextToTgtText,
                                        world.vocab, dopts);
    report.add("mt", "bleu", eval::bleu(texts.references, texts.hypotheses),
               static_cast<int64_t>(test.size()));
    write_hyp_ref(out_dir, "mt", texts);
  }
  if (kind == TrainKind::SingleSt || multi) {
    auto texts = eval::decode_direction(m, test, Direction::SrcAudioToTgtText,
                                        world.vocab, dopts);
    report.add("st", "bleu", eval::bleu(texts.references, texts.hypotheses),
               static_cast<int64_t>(test.size()));
    write_hyp_ref(out_dir, "st", texts);
    add_token_stats(report, world, texts.hypotheses);
  }
  return report;
}

eval::MetricsReport analyze_model(model::Model& m, const World& world,
                                  const std::string& out_dir) {
  using data::Lang;
  analysis::ExportOptions aopts;
  aopts.noise_sigma = world.cfg.noise_sigma;
  aopts.feature_dim = world.cfg.feature_dim;

  // Held-out pairs first (test + valid), then train, capped for analysis.
  std::vector<data::SentencePair> heldout = world.corpus.test;
  heldout.insert(heldout.end(), world.corpus.valid.begin(),
                 world.corpus.valid.end());
  std::vector<data::SentencePair> full = heldout;
  full.insert(full.end(), world.corpus.train.begin(),
              world.corpus.train.end());
  if (static_cast<int>(full.size()) > world.cfg.analysis_max_sentences)
    full.resize(world.cfg.analysis_max_sentences);

  const analysis::View audio_src{true, Lang::SRC, Lang::SRC};
  const analysis::View text_src{false, Lang::SRC, Lang::SRC};
  // Text-text similarity uses each side's translate-to-the-other tag.
  const analysis::View text_src_mt{false, Lang::SRC, Lang::TGT};
  const analysis::View text_tgt_mt{false, Lang::TGT, Lang::SRC};

  const std::string states_dir = join_path(out_dir, "states");
  fs::create_directories(states_dir);

  eval::MetricsReport report;
  analysis::SvccaOptions sopts;
  sopts.variance_kept = world.cfg.svcca_variance_kept;

  auto ta = analysis::export_pooled_states(m, full, audio_src, text_src,
                                           world.vocab, aopts);
  analysis::write_state_dump(join_path(states_dir, "text_audio.zssd"), ta.dump);
  report.add("analysis", "svcca_text_audio",
             analysis::svcca(ta.dump.x, ta.dump.y, sopts), ta.dump.x.rows);

  auto tt = analysis::export_pooled_states(m, full, text_src_mt, text_tgt_mt,
                                           world.vocab, aopts);
  analysis::write_state_dump(join_path(states_dir, "text_text.zssd"), tt.dump);
  report.add("analysis", "svcca_text_text",
             analysis::svcca(tt.dump.x, tt.dump.y, sopts), tt.dump.x.rows);

  // Held-out mean-pool squared error (the auxiliary-loss quantity).
  auto held = analysis::export_pooled_states(m, heldout, audio_src, text_src,
                                             world.vocab, aopts);
  analysis::write_state_dump(join_path(states_dir, "text_audio_heldout.zssd"),
                             held.dump);
  double mse = 0;
  for (int64_t i = 0; i < held.dump.x.rows; ++i) {
    double row = 0;
    for (int64_t j = 0; j < held.dump.x.cols; ++j) {
      const double d = held.dump.x.at(i, j) - held.dump.y.at(i, j);
      row += d * d;
    }
    mse += row / static_cast<double>(held.dump.x.cols);
  }
  mse /= static_cast<double>(held.dump.x.rows);
  report.add("analysis", "aux_mse_heldout", mse, held.dump.x.rows);

  // Token-level modality probe, audio positive.
  auto tokens = analysis::export_token_states(m, heldout, audio_src, text_src,
                                              world.vocab, aopts);
  analysis::Mat probe_states(0, tokens.dump.x.cols);
  probe_states.v = tokens.dump.x.v;
  probe_states.rows = tokens.dump.x.rows;
  probe_states.v.insert(probe_states.v.end(), tokens.dump.y.v.begin(),
                        tokens.dump.y.v.end());
  probe_states.rows += tokens.dump.y.rows;
  std::vector<uint8_t> labels(tokens.dump.x.rows, 1);
  labels.resize(probe_states.rows, 0);
  analysis::ProbeOptions popts;
  popts.iterations = world.cfg.probe_iterations;
  popts.learning_rate = world.cfg.probe_learning_rate;
  auto probe = analysis::modality_probe(probe_states, labels,
                                        world.cfg.data_seed ^ 0xbeef, popts);
  report.add("analysis", "probe_tpr", probe.tpr_pct, probe.test_count);
  report.add("analysis", "probe_tnr", probe.tnr_pct, probe.test_count);
  return report;
}

void write_manifest(const std::string& out_dir, const RunOptions& opts,
                    const World& world, const train::TrainResult& result,
                    const std::string& config_text) {
  std::ofstream os(join_path(out_dir, "manifest.txt"));
  os << "preset=" << opts.preset << "\n";
  os << "seed=" << opts.seed << "\n";
  os << "data_portion=" << opts.data_portion << "\n";
  os << "st_portion=" << opts.st_portion << "\n";
  os << "init_from=" << opts.init_from << "\n";
  os << "config=" << (opts.config_path.empty() ? "<defaults>" : opts.config_path)
     << "\n";
  os << std::hex;
  os << "config_hash=" << fnv1a(config_text) << "\n";
  os << "data_hash=" << corpus_hash(world.corpus) << "\n";
  os << std::dec;
  os << "vocab_size=" << world.vocab.size() << "\n";
  os << "best_epoch=" << result.best_epoch << "\n";
  os << "epochs_run=" << result.epochs_run << "\n";
  os << "steps=" << result.steps << "\n";
}

std::string config_text_of(const RunOptions& opts) {
  if (opts.config_path.empty()) return default_config_text();
  std::ifstream is(opts.config_path);
  if (!is) throw ArgumentError("cannot open config file: " + opts.config_path);
  std::stringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

}  // namespace

World build_world(const DeskConfig& cfg) {
  World world;
  world.cfg = cfg;
  data::CorpusOptions copts;
  copts.sent_len_min = cfg.sent_len_min;
  copts.sent_len_max = cfg.sent_len_max;
  copts.word_len_min = cfg.word_len_min;
  copts.word_len_max = cfg.word_len_max;
  copts.cognate_fraction = cfg.cognate_fraction;
  world.corpus = data::gen_parallel_corpus(cfg.data_seed, cfg.corpus_size,
                                           cfg.lexicon_size, copts);
  world.vocab = data::Vocabulary::build(all_texts(world.corpus));
  return world;
}

RunOutcome run_preset(const RunOptions& opts) {
  if (opts.out_dir.empty()) throw ArgumentError("run_preset: --out required");
  const ExperimentPreset& preset = find_preset(opts.preset);
  if (preset.needs_init_from && opts.init_from.empty())
    throw ArgumentError("preset '" + preset.name +
                        "' requires --init-from <checkpoint>");
  const std::string config_text = config_text_of(opts);
  const DeskConfig cfg = parse_config_text(
      config_text, opts.config_path.empty() ? "<defaults>" : opts.config_path);
  World world = build_world(cfg);
  fs::create_directories(opts.out_dir);

  RunOutcome outcome;

  if (preset.kind == TrainKind::Cascade) {
    // Two separately trained single-task systems composed at inference.
    auto run_single = [&](const char* preset_name, const char* file) {
      RunOptions sub = opts;
      sub.preset = preset_name;
      const ExperimentPreset& p = find_preset(preset_name);
      auto m = build_model(world, p, sub);
      auto plan = datasets_for(p, world, sub);
      auto topts = train_options(cfg, opts.seed, false);
      auto result = train::train(*m, plan.train, plan.valid, topts);
      train::save_checkpoint(*m, world.vocab, join_path(opts.out_dir, file),
                             result.best_epoch, result.best_valid_loss);
      return std::make_pair(std::move(m), result);
    };
    auto [asr_model, asr_result] = run_single("single-asr", "asr.zsxl");
    auto [mt_model, mt_result] = run_single("single-mt", "mt.zsxl");

    const auto dopts = decode_options(cfg);
    data::AssembleOptions aopts = assemble_options(cfg);
    aopts.seed = dopts.render_seed;
    auto st_ds = data::build_direction_dataset(
        data::Direction::SrcAudioToTgtText, world.corpus.test, world.vocab,
        aopts);
    eval::EvalTexts st_texts;
    for (const auto& s : st_ds.samples) {
      auto res = eval::cascade_translate(*asr_model, *mt_model, s.frames,
                                         world.vocab, cfg.eval_max_len);
      st_texts.references.push_back(s.output_text);
      st_texts.hypotheses.push_back(res.translation);
    }
    outcome.metrics.add("st", "bleu",
                        eval::bleu(st_texts.references, st_texts.hypotheses),
                        static_cast<int64_t>(st_ds.samples.size()));
    write_hyp_ref(opts.out_dir, "st", st_texts);
    add_token_stats(outcome.metrics, world, st_texts.hypotheses);

    auto asr_eval =
        evaluate_model(*asr_model, world, TrainKind::SingleAsr, opts.out_dir);
    auto mt_eval =
        evaluate_model(*mt_model, world, TrainKind::SingleMt, opts.out_dir);
    outcome.metrics.entries.insert(outcome.metrics.entries.end(),
                                   asr_eval.entries.begin(),
                                   asr_eval.entries.end());
    outcome.metrics.entries.insert(outcome.metrics.entries.end(),
                                   mt_eval.entries.begin(),
                                   mt_eval.entries.end());
    outcome.train_result = asr_result;
    outcome.checkpoint_path = join_path(opts.out_dir, "asr.zsxl");
    eval::write_metrics(join_path(opts.out_dir, "metrics.txt"),
                        outcome.metrics);
    train::write_train_log(join_path(opts.out_dir, "train_log.txt"),
                           asr_result.log);
    write_manifest(opts.out_dir, opts, world, asr_result, config_text);
    return outcome;
  }

  auto m = build_model(world, preset, opts);
  auto plan = datasets_for(preset, world, opts);
  const bool finetuning = !opts.init_from.empty();
  auto topts = train_options(cfg, opts.seed, finetuning);
  outcome.train_result =
      finetuning ? train::finetune(*m, plan.train, plan.valid, topts)
                 : train::train(*m, plan.train, plan.valid, topts);

  outcome.checkpoint_path = join_path(opts.out_dir, "checkpoint.zsxl");
  train::save_checkpoint(*m, world.vocab, outcome.checkpoint_path,
                         outcome.train_result.best_epoch,
                         outcome.train_result.best_valid_loss);
  train::write_train_log(join_path(opts.out_dir, "train_log.txt"),
                         outcome.train_result.log);

  outcome.metrics = evaluate_model(*m, world, preset.kind, opts.out_dir);
  eval::write_metrics(join_path(opts.out_dir, "metrics.txt"), outcome.metrics);

  const bool multi = preset.kind == TrainKind::MultiTask ||
                     preset.kind == TrainKind::FinetuneSt ||
                     preset.kind == TrainKind::FinetuneMix;
  if (multi) {
    outcome.analysis = analyze_model(*m, world, opts.out_dir);
    eval::write_metrics(join_path(opts.out_dir, "analysis.txt"),
                        outcome.analysis);
  }
  write_manifest(opts.out_dir, opts, world, outcome.train_result, config_text);
  return outcome;
}

eval::MetricsReport evaluate_checkpoint(const std::string& checkpoint_path,
                                        const DeskConfig& cfg,
                                        const std::string& out_dir) {
  auto loaded = train::load_checkpoint(checkpoint_path);
  World world = build_world(cfg);
  if (loaded.vocab.chars() != world.vocab.chars())
    throw ArgumentError(
        "checkpoint vocabulary differs from the config corpus");
  fs::create_directories(out_dir);
  auto report =
      evaluate_model(*loaded.model, world, TrainKind::MultiTask, out_dir);
  eval::write_metrics(join_path(out_dir, "metrics.txt"), report);
  return report;
}

eval::MetricsReport analyze_checkpoint(const std::string& checkpoint_path,
                                       const DeskConfig& cfg,
                                       const std::string& out_dir) {
  auto loaded = train::load_checkpoint(checkpoint_path);
  World world = build_world(cfg);
  if (loaded.vocab.chars() != world.vocab.chars())
    throw ArgumentError(
        "checkpoint vocabulary differs from the config corpus");
  fs::create_directories(out_dir);
  auto report = analyze_model(*loaded.model, world, out_dir);
  eval::write_metrics(join_path(out_dir, "analysis.txt"), report);
  return report;
}

void generate_corpus_files(const DeskConfig& cfg, data::Setting setting,
                           const std::string& out_dir) {
  World world = build_world(cfg);
  fs::create_directories(out_dir);
  const auto aopts = assemble_options(cfg);
  std::vector<data::SplitDatasets> splits;
  splits.push_back({"train", data::assemble_training_set(
                                 world.corpus.train, setting, world.vocab,
                                 aopts)});
  splits.push_back({"valid", data::assemble_training_set(
                                 world.corpus.valid, setting, world.vocab,
                                 aopts)});
  splits.push_back({"test", data::assemble_training_set(world.corpus.test,
                                                        setting, world.vocab,
                                                        aopts)});
  data::write_corpus_files(join_path(out_dir, "manifest.tsv"),
                           join_path(out_dir, "frames.bin"), splits);

  std::ofstream lex(join_path(out_dir, "lexicon.txt"));
  for (size_t i = 0; i < world.corpus.lexicon.src_words.size(); ++i)
    lex << world.corpus.lexicon.src_words[i] << '\t'
        << world.corpus.lexicon.tgt_words[i] << '\n';
  std::ofstream voc(join_path(out_dir, "vocab.txt"));
  voc << world.vocab.chars();
}

std::string write_compare(const std::vector<std::string>& run_dirs,
                          const std::string& baseline_dir,
                          const std::string& out_table_path,
                          const std::string& out_records_path) {
  if (run_dirs.empty()) throw ArgumentError("compare: no run directories");

  auto report_of = [](const std::string& dir) {
    const std::string path = join_path(dir, "metrics.txt");
    if (!fs::exists(path))
      throw ArgumentError("compare: no metrics report in directory '" + dir +
                          "'");
    return eval::read_metrics(path);
  };

  eval::MetricsReport baseline;
  const bool with_baseline = !baseline_dir.empty();
  if (with_baseline) baseline = report_of(baseline_dir);

  std::vector<std::pair<std::string, eval::MetricsReport>> runs;
  for (const auto& dir : run_dirs) runs.emplace_back(dir, report_of(dir));

  // Column order: first-seen (task, metric) across runs.
  std::vector<std::pair<std::string, std::string>> columns;
  auto add_cols = [&](const eval::MetricsReport& r) {
    for (const auto& e : r.entries) {
      std::pair<std::string, std::string> key{e.task, e.metric};
      bool seen = false;
      for (const auto& c : columns) seen |= c == key;
      if (!seen) columns.push_back(key);
    }
  };
  for (const auto& [dir, r] : runs) add_cols(r);

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"run"};
  for (const auto& [task, metric] : columns)
    header.push_back(task + "/" + metric);
  cells.push_back(header);

  std::ofstream records(out_records_path);
  if (!records)
    throw ArgumentError("compare: cannot write " + out_records_path);

  for (const auto& [dir, r] : runs) {
    std::vector<std::string> row = {dir};
    for (const auto& [task, metric] : columns) {
      std::ostringstream cell;
      if (r.has(task, metric)) {
        const double v = r.get(task, metric);
        cell << std::fixed << std::setprecision(3) << v;
        records << "run=" << dir << " task=" << task << " metric=" << metric
                << " value=" << std::fixed << std::setprecision(6) << v;
        if (with_baseline && dir != baseline_dir &&
            baseline.has(task, metric)) {
          const double delta = v - baseline.get(task, metric);
          cell << " (" << (delta >= 0 ? "+" : "") << std::fixed
               << std::setprecision(3) << delta << ")";
          records << " delta=" << std::fixed << std::setprecision(6) << delta;
        }
        records << "\n";
      } else {
        cell << "-";
      }
      row.push_back(cell.str());
    }
    cells.push_back(row);
  }

  std::vector<size_t> widths(cells[0].size(), 0);
  for (const auto& row : cells)
    for (size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());
  std::ostringstream table;
  for (const auto& row : cells) {
    for (size_t c = 0; c < row.size(); ++c) {
      table << std::left << std::setw(static_cast<int>(widths[c]) + 2)
            << row[c];
    }
    table << "\n";
  }
  std::ofstream table_os(out_table_path);
  if (!table_os) throw ArgumentError("compare: cannot write " + out_table_path);
  table_os << table.str();
  return table.str();
}

}  // namespace zs::cli
