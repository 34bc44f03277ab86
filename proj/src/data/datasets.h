// src/data/datasets.h
//
// Training samples and dataset assembly for the experiment settings, plus
// the per-epoch batch interleaving schedule.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "data/audio.h"
#include "data/corpus.h"
#include "data/vocab.h"

namespace zs::data {

// A single training direction, e.g. SRC-audio -> TGT-text.
enum class Direction {
  SrcAudioToSrcText,   // ASR
  SrcTextToTgtText,    // MT
  SrcAudioToSrcR,      // augmentation (a)
  SrcTextToSrcR,       // augmentation (a)
  SrcRToSrcText,       // augmentation (b)
  SrcRToTgtText,       // augmentation (b)
  TgtAudioToTgtText,   // opposite ASR
  TgtTextToSrcText,    // opposite MT
  SrcAudioToTgtText,   // ST (fine-tuning / direct end-to-end / evaluation)
};

std::string direction_label(Direction d);  // e.g. "SRC-audio->TGT-text"
bool direction_has_audio_input(Direction d);
Lang direction_output_lang(Direction d);
// True when the output is the transcript of the audio input (eligible for
// the text-audio auxiliary pairing).
bool direction_is_asr(Direction d);

struct Sample {
  bool audio_input = false;
  std::vector<int> input_ids;  // text inputs, untagged (tag is prepended by the encoder)
  UtteranceFrames frames;      // audio inputs
  Lang target_lang = Lang::SRC;
  std::vector<int> output_ids;  // untagged target tokens
  std::string input_text;       // source-side text (the transcript for audio)
  std::string output_text;
  std::string direction;
};

struct Dataset {
  std::string id;
  std::string direction;
  bool asr_like = false;
  std::vector<Sample> samples;
};

enum class Setting { Plain, AugmentA, AugmentB, AugmentC, Opposite };

Setting setting_from_name(const std::string& name);
std::string setting_name(Setting s);

struct AssembleOptions {
  double noise_sigma = 0.1;
  int feature_dim = 8;
  uint64_t seed = 1;  // drives utterance rendering and half-subset choice
};

// Builds one dataset of a given direction over the provided pairs.
Dataset build_direction_dataset(Direction dir,
                                const std::vector<SentencePair>& pairs,
                                const Vocabulary& vocab,
                                const AssembleOptions& opts);

// The per-setting dataset collection. Artificial and opposite datasets use
// a seeded half-size subset of the pairs (ceil(N/2) samples each).
std::vector<Dataset> assemble_training_set(
    const std::vector<SentencePair>& pairs, Setting setting,
    const Vocabulary& vocab, const AssembleOptions& opts);

// Seeded subset of ceil(portion * N) pairs (at least one).
std::vector<SentencePair> take_portion(const std::vector<SentencePair>& pairs,
                                       double portion, uint64_t seed);

struct BatchRef {
  int dataset = 0;
  int batch = 0;
};

struct DatasetSchedule {
  // batches[ds][batch] -> sample indices into datasets[ds].samples
  std::vector<std::vector<std::vector<int>>> batches;
  std::vector<BatchRef> order;
};

// Shuffles each dataset with the epoch seed, splits into batches, and
// interleaves them proportionally so all datasets finish together.
DatasetSchedule schedule_batches(const std::vector<Dataset>& datasets,
                                 int batch_size, uint64_t seed);

// --- Corpus manifest interchange -------------------------------------------
// Manifest: one tab-separated record per sample
//   split  direction  input-ref  target-lang  output-text
// where input-ref is "text:<sentence>" or "audio:<ordinal>". Frames live in
// a binary sidecar: per utterance a u32 frame count, u32 feature dim, then
// row-major little-endian float32 data.

struct SplitDatasets {
  std::string split;  // "train" / "valid" / "test"
  std::vector<Dataset> datasets;
};

void write_corpus_files(const std::string& manifest_path,
                        const std::string& frames_path,
                        const std::vector<SplitDatasets>& splits);

std::vector<SplitDatasets> read_corpus_files(const std::string& manifest_path,
                                             const std::string& frames_path,
                                             const Vocabulary& vocab);

}  // namespace zs::data
