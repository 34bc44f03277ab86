// src/data/datasets.cc

#include "data/datasets.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "core/error.h"

namespace zs::data {

namespace {

struct DirectionSpec {
  const char* label;
  bool audio_input;
  Lang input_lang;   // language rendered/encoded on the input side
  Lang output_lang;
  bool asr;
};

const DirectionSpec& spec_of(Direction d) {
  static const std::map<Direction, DirectionSpec> kSpecs = {
      {Direction::SrcAudioToSrcText,
       {"SRC-audio->SRC-text", true, Lang::SRC, Lang::SRC, true}},
      {Direction::SrcTextToTgtText,
       {"SRC-text->TGT-text", false, Lang::SRC, Lang::TGT, false}},
      {Direction::SrcAudioToSrcR,
       {"SRC-audio->SRC-R-text", true, Lang::SRC, Lang::SRCR, false}},
      {Direction::SrcTextToSrcR,
       {"SRC-text->SRC-R-text", false, Lang::SRC, Lang::SRCR, false}},
      {Direction::SrcRToSrcText,
       {"SRC-R-text->SRC-text", false, Lang::SRCR, Lang::SRC, false}},
      {Direction::SrcRToTgtText,
       {"SRC-R-text->TGT-text", false, Lang::SRCR, Lang::TGT, false}},
      {Direction::TgtAudioToTgtText,
       {"TGT-audio->TGT-text", true, Lang::TGT, Lang::TGT, true}},
      {Direction::TgtTextToSrcText,
       {"TGT-text->SRC-text", false, Lang::TGT, Lang::SRC, false}},
      {Direction::SrcAudioToTgtText,
       {"SRC-audio->TGT-text", true, Lang::SRC, Lang::TGT, false}},
  };
  return kSpecs.at(d);
}

std::string text_for(const SentencePair& pair, Lang lang) {
  switch (lang) {
    case Lang::SRC: return pair.src.text;
    case Lang::TGT: return pair.tgt.text;
    case Lang::SRCR: return reverse_language(pair.src).text;
  }
  throw ArgumentError("text_for: bad enum value");
}

std::vector<SentencePair> seeded_subset(const std::vector<SentencePair>& pairs,
                                        size_t count, core::Rng rng) {
  std::vector<size_t> idx(pairs.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng.uniform_int(0, static_cast<int64_t>(i) - 1)]);
  idx.resize(std::min(count, idx.size()));
  std::sort(idx.begin(), idx.end());  // keep corpus order within the subset
  std::vector<SentencePair> out;
  out.reserve(idx.size());
  for (size_t i : idx) out.push_back(pairs[i]);
  return out;
}

}  // namespace

std::string direction_label(Direction d) { return spec_of(d).label; }
bool direction_has_audio_input(Direction d) { return spec_of(d).audio_input; }
Lang direction_output_lang(Direction d) { return spec_of(d).output_lang; }
bool direction_is_asr(Direction d) { return spec_of(d).asr; }

Setting setting_from_name(const std::string& name) {
  if (name == "plain") return Setting::Plain;
  if (name == "augment-a") return Setting::AugmentA;
  if (name == "augment-b") return Setting::AugmentB;
  if (name == "augment-c") return Setting::AugmentC;
  if (name == "opposite") return Setting::Opposite;
  throw ArgumentError("unknown data setting '" + name +
                      "' (expected plain|augment-a|augment-b|augment-c|opposite)");
}

std::string setting_name(Setting s) {
  switch (s) {
    case Setting::Plain: return "plain";
    case Setting::AugmentA: return "augment-a";
    case Setting::AugmentB: return "augment-b";
    case Setting::AugmentC: return "augment-c";
    case Setting::Opposite: return "opposite";
  }
  throw ArgumentError("setting_name: bad enum value");
}

Dataset build_direction_dataset(Direction dir,
                                const std::vector<SentencePair>& pairs,
                                const Vocabulary& vocab,
                                const AssembleOptions& opts) {
  const DirectionSpec& spec = spec_of(dir);
  Dataset ds;
  ds.id = spec.label;
  ds.direction = spec.label;
  ds.asr_like = spec.asr;
  ds.samples.reserve(pairs.size());
  core::Rng dir_rng = core::Rng(opts.seed).child(spec.label);
  for (size_t i = 0; i < pairs.size(); ++i) {
    const std::string in_text = text_for(pairs[i], spec.input_lang);
    const std::string out_text = text_for(pairs[i], spec.output_lang);
    Sample s;
    s.audio_input = spec.audio_input;
    s.target_lang = spec.output_lang;
    s.input_text = in_text;
    s.output_text = out_text;
    s.output_ids = vocab.encode(out_text);
    s.direction = spec.label;
    if (spec.audio_input) {
      s.frames = render_pseudo_audio(in_text, dir_rng.next_u64(),
                                     opts.noise_sigma, opts.feature_dim);
    } else {
      s.input_ids = vocab.encode(in_text);
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

std::vector<Dataset> assemble_training_set(
    const std::vector<SentencePair>& pairs, Setting setting,
    const Vocabulary& vocab, const AssembleOptions& opts) {
  if (pairs.empty())
    throw ArgumentError("assemble_training_set: empty sentence pair list");
  const size_t half = (pairs.size() + 1) / 2;

  std::vector<Dataset> out;
  auto add = [&](Direction dir, const std::vector<SentencePair>& p) {
    out.push_back(build_direction_dataset(dir, p, vocab, opts));
  };
  auto half_subset = [&](const char* tag) {
    return seeded_subset(pairs, half, core::Rng(opts.seed).child(tag));
  };

  add(Direction::SrcAudioToSrcText, pairs);
  add(Direction::SrcTextToTgtText, pairs);
  switch (setting) {
    case Setting::Plain:
      break;
    case Setting::AugmentA:
      add(Direction::SrcAudioToSrcR, half_subset("aug-audio-srcr"));
      add(Direction::SrcTextToSrcR, half_subset("aug-text-srcr"));
      break;
    case Setting::AugmentB:
      add(Direction::SrcRToSrcText, half_subset("aug-srcr-src"));
      add(Direction::SrcRToTgtText, half_subset("aug-srcr-tgt"));
      break;
    case Setting::AugmentC:
      add(Direction::SrcAudioToSrcR, half_subset("aug-audio-srcr"));
      add(Direction::SrcTextToSrcR, half_subset("aug-text-srcr"));
      add(Direction::SrcRToSrcText, half_subset("aug-srcr-src"));
      add(Direction::SrcRToTgtText, half_subset("aug-srcr-tgt"));
      break;
    case Setting::Opposite:
      add(Direction::TgtAudioToTgtText, half_subset("opp-asr"));
      add(Direction::TgtTextToSrcText, half_subset("opp-mt"));
      break;
  }
  return out;
}

std::vector<SentencePair> take_portion(const std::vector<SentencePair>& pairs,
                                       double portion, uint64_t seed) {
  if (portion <= 0.0 || portion > 1.0)
    throw ArgumentError("take_portion: portion must be in (0, 1]");
  const size_t count = std::max<size_t>(
      1, static_cast<size_t>(std::ceil(portion * pairs.size())));
  return seeded_subset(pairs, count, core::Rng(seed).child("portion"));
}

DatasetSchedule schedule_batches(const std::vector<Dataset>& datasets,
                                 int batch_size, uint64_t seed) {
  if (batch_size < 1) throw ArgumentError("schedule_batches: batch size < 1");
  if (datasets.empty())
    throw ArgumentError("schedule_batches: no datasets given");
  DatasetSchedule sched;
  sched.batches.resize(datasets.size());
  core::Rng rng(seed);
  for (size_t d = 0; d < datasets.size(); ++d) {
    const auto& ds = datasets[d];
    if (ds.samples.empty())
      throw ArgumentError("schedule_batches: dataset '" + ds.id + "' is empty");
    std::vector<int> idx(ds.samples.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    core::Rng ds_rng = rng.child(static_cast<uint64_t>(d));
    for (size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1],
                idx[ds_rng.uniform_int(0, static_cast<int64_t>(i) - 1)]);
    for (size_t b = 0; b < idx.size(); b += batch_size) {
      const size_t end = std::min(idx.size(), b + batch_size);
      sched.batches[d].emplace_back(idx.begin() + b, idx.begin() + end);
    }
  }
  // Proportional interleave: batch j of a dataset with c batches gets key
  // (j + 0.5) / c; merging by key spaces every dataset evenly across the
  // epoch, so they all finish together.
  struct Keyed {
    double key;
    BatchRef ref;
  };
  std::vector<Keyed> keyed;
  for (size_t d = 0; d < sched.batches.size(); ++d) {
    const double c = static_cast<double>(sched.batches[d].size());
    for (size_t b = 0; b < sched.batches[d].size(); ++b)
      keyed.push_back(
          {(static_cast<double>(b) + 0.5) / c,
           BatchRef{static_cast<int>(d), static_cast<int>(b)}});
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const Keyed& a, const Keyed& b) { return a.key < b.key; });
  sched.order.reserve(keyed.size());
  for (const auto& k : keyed) sched.order.push_back(k.ref);
  return sched;
}

// ---------------------------------------------------------------------------
// Manifest + frames sidecar

namespace {

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IntegrityError("frames sidecar: truncated header");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float f) {
  uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(os, v);
}

float get_f32(std::istream& is) {
  const uint32_t v = get_u32(is);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

}  // namespace

void write_corpus_files(const std::string& manifest_path,
                        const std::string& frames_path,
                        const std::vector<SplitDatasets>& splits) {
  std::ofstream manifest(manifest_path);
  if (!manifest)
    throw ArgumentError("cannot open manifest for writing: " + manifest_path);
  std::ofstream frames(frames_path, std::ios::binary);
  if (!frames)
    throw ArgumentError("cannot open frames sidecar for writing: " + frames_path);

  int utt_ordinal = 0;
  for (const auto& split : splits) {
    for (const auto& ds : split.datasets) {
      for (const auto& s : ds.samples) {
        std::string input_ref;
        if (s.audio_input) {
          input_ref = "audio:" + std::to_string(utt_ordinal++);
          put_u32(frames, static_cast<uint32_t>(s.frames.n_frames));
          put_u32(frames, static_cast<uint32_t>(s.frames.dim));
          for (double v : s.frames.data) put_f32(frames, static_cast<float>(v));
        } else {
          input_ref = "text:" + s.input_text;
        }
        manifest << split.split << '\t' << ds.direction << '\t' << input_ref
                 << '\t' << lang_name(s.target_lang) << '\t' << s.output_text
                 << '\n';
      }
    }
  }
}

std::vector<SplitDatasets> read_corpus_files(const std::string& manifest_path,
                                             const std::string& frames_path,
                                             const Vocabulary& vocab) {
  std::ifstream manifest(manifest_path);
  if (!manifest) throw ArgumentError("cannot open manifest: " + manifest_path);
  std::ifstream frames(frames_path, std::ios::binary);
  if (!frames)
    throw ArgumentError("cannot open frames sidecar: " + frames_path);

  std::vector<SplitDatasets> out;
  auto split_of = [&](const std::string& name) -> SplitDatasets& {
    for (auto& s : out)
      if (s.split == name) return s;
    out.push_back(SplitDatasets{name, {}});
    return out.back();
  };

  std::string line;
  int line_no = 0;
  int next_utt = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t start = 0;
    for (int i = 0; i < 4; ++i) {
      const size_t tab = line.find('\t', start);
      if (tab == std::string::npos)
        throw FormatError("manifest line " + std::to_string(line_no) +
                          ": expected 5 tab-separated fields");
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    fields.push_back(line.substr(start));

    SplitDatasets& split = split_of(fields[0]);
    Dataset* ds = nullptr;
    for (auto& d : split.datasets)
      if (d.direction == fields[1]) ds = &d;
    if (!ds) {
      split.datasets.push_back(Dataset{fields[1], fields[1], false, {}});
      ds = &split.datasets.back();
    }

    Sample s;
    s.direction = fields[1];
    s.target_lang = lang_from_name(fields[3]);
    s.output_text = fields[4];
    s.output_ids = vocab.encode(s.output_text);
    const std::string& ref = fields[2];
    if (ref.rfind("audio:", 0) == 0) {
      s.audio_input = true;
      // Utterances are stored in manifest order; a mismatched ordinal means
      // the manifest and sidecar drifted apart.
      if (std::stoi(ref.substr(6)) != next_utt++)
        throw IntegrityError("manifest line " + std::to_string(line_no) +
                             ": utterance ordinal out of sequence");
      UtteranceFrames& f = s.frames;
      f.n_frames = get_u32(frames);
      f.dim = get_u32(frames);
      f.data.resize(f.n_frames * f.dim);
      for (auto& v : f.data) v = static_cast<double>(get_f32(frames));
    } else if (ref.rfind("text:", 0) == 0) {
      s.input_text = ref.substr(5);
      s.input_ids = vocab.encode(s.input_text);
    } else {
      throw FormatError("manifest line " + std::to_string(line_no) +
                        ": bad input-ref '" + ref + "'");
    }
    // asr_like is derivable: audio input whose output language names the
    // input audio language (transcription directions).
    ds->asr_like = ds->direction == "SRC-audio->SRC-text" ||
                   ds->direction == "TGT-audio->TGT-text";
    ds->samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace zs::data
