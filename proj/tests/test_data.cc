// tests/test_data.cc

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <map>
#include <set>

#include "core/error.h"
#include "data/audio.h"
#include "data/corpus.h"
#include "data/datasets.h"
#include "data/vocab.h"

using namespace zs;
using namespace zs::data;

TEST_CASE("reverse_language paper example and hand cases") {
  CHECK(reverse_language({"Hello world!", Lang::SRC}).text == "Dlrow olleh!");
  CHECK(reverse_language({"", Lang::SRC}).text == "");
  CHECK(reverse_language({"Abc, def.", Lang::SRC}).text == "Fed cba.");
  CHECK(reverse_language({"Hello world!", Lang::SRC}).lang == Lang::SRCR);
  CHECK_THROWS_AS(reverse_language({"x", Lang::TGT}), ArgumentError);
}

TEST_CASE("reverse_language core is an involution on normalized sentences") {
  ParallelCorpus corpus = gen_parallel_corpus(5, 40, 20);
  for (const auto& pair : corpus.train) {
    Sentence once = reverse_language(pair.src);
    Sentence twice = reverse_language({once.text, Lang::SRC});
    // Generated sentences are already normalized, so two reversals are exact.
    CHECK(twice.text == pair.src.text);
  }
}

TEST_CASE("corpus generation is deterministic and word counts match") {
  ParallelCorpus a = gen_parallel_corpus(123, 60, 24);
  ParallelCorpus b = gen_parallel_corpus(123, 60, 24);
  REQUIRE(a.train.size() == b.train.size());
  for (size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].src.text == b.train[i].src.text);
    CHECK(a.train[i].tgt.text == b.train[i].tgt.text);
  }
  for (const auto& pair : a.train)
    CHECK(content_words(pair.src.text).size() ==
          content_words(pair.tgt.text).size());
}

TEST_CASE("corpus TGT side is the cipher in reversed word order") {
  ParallelCorpus corpus = gen_parallel_corpus(9, 30, 16);
  for (const auto& pair : corpus.train) {
    auto src_ws = content_words(pair.src.text);
    auto tgt_ws = content_words(pair.tgt.text);
    REQUIRE(src_ws.size() == tgt_ws.size());
    for (size_t i = 0; i < src_ws.size(); ++i)
      CHECK(corpus.lexicon.translate(src_ws[i]) ==
            tgt_ws[tgt_ws.size() - 1 - i]);
    // Same terminal punctuation on both sides.
    CHECK(pair.src.text.back() == pair.tgt.text.back());
  }
}

TEST_CASE("corpus splits are disjoint at the sentence level") {
  ParallelCorpus corpus = gen_parallel_corpus(7, 80, 24);
  std::set<std::string> seen;
  auto check_split = [&](const std::vector<SentencePair>& split) {
    for (const auto& p : split) CHECK(seen.insert(p.src.text).second);
  };
  check_split(corpus.train);
  check_split(corpus.valid);
  check_split(corpus.test);
  CHECK(corpus.valid.size() > 0);
  CHECK(corpus.test.size() > 0);
  CHECK(corpus.train.size() + corpus.valid.size() + corpus.test.size() == 80);
}

TEST_CASE("corpus argument validation") {
  CHECK_THROWS_AS(gen_parallel_corpus(1, 0, 10), ArgumentError);
  CHECK_THROWS_AS(gen_parallel_corpus(1, 10, 0), ArgumentError);
}

TEST_CASE("pseudo audio with zero noise repeats exact codebook rows") {
  UtteranceFrames utt = render_pseudo_audio("ab", 42, 0.0, 8);
  REQUIRE(utt.dim == 8);
  auto ca = codebook_vector('a', 8);
  auto cb = codebook_vector('b', 8);
  REQUIRE(utt.n_frames >= 4);
  REQUIRE(utt.n_frames <= 8);
  // Frames must be exact copies: first block 'a', second block 'b'.
  int64_t f = 0;
  bool in_b = false;
  for (; f < utt.n_frames; ++f) {
    const auto& expect = in_b ? cb : ca;
    bool matches_a = true, matches_b = true;
    for (int d = 0; d < 8; ++d) {
      matches_a &= utt.at(f, d) == ca[d];
      matches_b &= utt.at(f, d) == cb[d];
    }
    if (!in_b && matches_b) in_b = true;
    CHECK((matches_a || matches_b));
    if (!in_b)
      for (int d = 0; d < 8; ++d) CHECK(utt.at(f, d) == expect[d]);
  }
}

TEST_CASE("pseudo audio frame count bounds over many sentences") {
  core::Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    const int n = static_cast<int>(rng.uniform_int(1, 30));
    std::string text;
    for (int j = 0; j < n; ++j)
      text.push_back(static_cast<char>('a' + rng.uniform_int(0, 25)));
    UtteranceFrames utt = render_pseudo_audio(text, rng.next_u64(), 0.1, 4);
    CHECK(utt.n_frames >= 2 * n);
    CHECK(utt.n_frames <= 4 * n);
  }
}

TEST_CASE("pseudo audio is deterministic and rejects unknown characters") {
  UtteranceFrames a = render_pseudo_audio("Wola bemi.", 9, 0.1, 8);
  UtteranceFrames b = render_pseudo_audio("Wola bemi.", 9, 0.1, 8);
  CHECK(a.data == b.data);
  CHECK(a.n_frames == b.n_frames);
  CHECK_THROWS_AS(render_pseudo_audio("a\tb", 1, 0.1, 8), ArgumentError);
}

TEST_CASE("vocabulary reserved ids, round trip, and unk") {
  Vocabulary v = Vocabulary::build({"ab a.", "ba b."});
  // 7 reserved + {space, '.', 'a', 'b'}
  CHECK(v.size() == Vocabulary::kNumReserved + 4);
  auto ids = v.encode("ab");
  CHECK(v.decode(ids) == "ab");
  CHECK(v.encode_char('z') == Vocabulary::kUnk);
  CHECK(Vocabulary::tag_id(Lang::SRC) == Vocabulary::kTagSrc);
  CHECK(Vocabulary::tag_id(Lang::TGT) == Vocabulary::kTagTgt);
  CHECK(Vocabulary::tag_id(Lang::SRCR) == Vocabulary::kTagSrcR);

  Vocabulary w = Vocabulary::build({"ba b.", "ab a."});
  CHECK(w.chars() == v.chars());  // stable ids for the same corpora
}

TEST_CASE("assemble_training_set settings and sizes") {
  ParallelCorpus corpus = gen_parallel_corpus(11, 21, 18);
  Vocabulary vocab = Vocabulary::build({"abcdefghijklmnopqrstuvwxyz .!?",
                                        "ABCDEFGHIJKLMNOPQRSTUVWXYZ"});
  AssembleOptions opts;
  opts.seed = 3;
  const size_t n = corpus.train.size();
  const size_t half = (n + 1) / 2;

  auto plain = assemble_training_set(corpus.train, Setting::Plain, vocab, opts);
  REQUIRE(plain.size() == 2);
  CHECK(plain[0].direction == "SRC-audio->SRC-text");
  CHECK(plain[1].direction == "SRC-text->TGT-text");
  CHECK(plain[0].samples.size() == n);
  CHECK(plain[1].samples.size() == n);
  CHECK(plain[0].asr_like);
  CHECK_FALSE(plain[1].asr_like);

  auto aug_a = assemble_training_set(corpus.train, Setting::AugmentA, vocab, opts);
  REQUIRE(aug_a.size() == 4);
  CHECK(aug_a[2].direction == "SRC-audio->SRC-R-text");
  CHECK(aug_a[3].direction == "SRC-text->SRC-R-text");
  CHECK(aug_a[2].samples.size() == half);
  CHECK(aug_a[3].samples.size() == half);

  auto aug_b = assemble_training_set(corpus.train, Setting::AugmentB, vocab, opts);
  REQUIRE(aug_b.size() == 4);
  CHECK(aug_b[2].direction == "SRC-R-text->SRC-text");
  CHECK(aug_b[3].direction == "SRC-R-text->TGT-text");

  // Setting (c) adds exactly the union of (a) and (b).
  auto aug_c = assemble_training_set(corpus.train, Setting::AugmentC, vocab, opts);
  REQUIRE(aug_c.size() == 6);
  std::set<std::string> c_dirs;
  for (const auto& d : aug_c) c_dirs.insert(d.direction);
  for (const auto& d : aug_a) CHECK(c_dirs.count(d.direction));
  for (const auto& d : aug_b) CHECK(c_dirs.count(d.direction));
  for (size_t i = 2; i < aug_c.size(); ++i)
    CHECK(aug_c[i].samples.size() == half);

  auto opp = assemble_training_set(corpus.train, Setting::Opposite, vocab, opts);
  REQUIRE(opp.size() == 4);
  CHECK(opp[2].direction == "TGT-audio->TGT-text");
  CHECK(opp[3].direction == "TGT-text->SRC-text");
  CHECK(opp[2].asr_like);
  CHECK(opp[2].samples.size() == half);
  CHECK(opp[3].samples.size() == half);

  CHECK_THROWS_AS(setting_from_name("bogus"), ArgumentError);
}

TEST_CASE("samples carry the output language as tag and no tag in payload") {
  ParallelCorpus corpus = gen_parallel_corpus(13, 15, 16);
  Vocabulary vocab = Vocabulary::build(
      {corpus.train[0].src.text, corpus.train[0].tgt.text,
       "abcdefghijklmnopqrstuvwxyz .!?ABCDEFGHIJKLMNOPQRSTUVWXYZ"});
  AssembleOptions opts;
  for (auto setting : {Setting::Plain, Setting::AugmentC, Setting::Opposite}) {
    auto datasets = assemble_training_set(corpus.train, setting, vocab, opts);
    for (const auto& ds : datasets) {
      for (const auto& s : ds.samples) {
        CHECK(s.target_lang == direction_output_lang(
                                   [&] {
                                     // direction string round trip
                                     for (auto d :
                                          {Direction::SrcAudioToSrcText,
                                           Direction::SrcTextToTgtText,
                                           Direction::SrcAudioToSrcR,
                                           Direction::SrcTextToSrcR,
                                           Direction::SrcRToSrcText,
                                           Direction::SrcRToTgtText,
                                           Direction::TgtAudioToTgtText,
                                           Direction::TgtTextToSrcText,
                                           Direction::SrcAudioToTgtText})
                                       if (direction_label(d) == s.direction)
                                         return d;
                                     throw ArgumentError("bad direction");
                                   }()));
        for (int id : s.input_ids) CHECK_FALSE(Vocabulary::is_tag(id));
        for (int id : s.output_ids) CHECK_FALSE(Vocabulary::is_tag(id));
        if (!s.audio_input) CHECK_FALSE(s.input_ids.empty());
        CHECK_FALSE(s.output_ids.empty());
      }
    }
  }
}

TEST_CASE("schedule interleaves 10 and 5 batches in a 2:1 pattern") {
  Vocabulary vocab = Vocabulary::build({"ab"});
  Dataset big{"big", "SRC-text->TGT-text", false, {}};
  Dataset small{"small", "SRC-text->TGT-text", false, {}};
  Sample s;
  s.input_ids = vocab.encode("a");
  s.output_ids = vocab.encode("b");
  for (int i = 0; i < 10; ++i) big.samples.push_back(s);
  for (int i = 0; i < 5; ++i) small.samples.push_back(s);
  auto sched = schedule_batches({big, small}, 1, 99);
  REQUIRE(sched.order.size() == 15);
  for (size_t i = 0; i < sched.order.size(); ++i)
    CHECK(sched.order[i].dataset == (i % 3 == 1 ? 1 : 0));
}

TEST_CASE("schedule covers every batch exactly once and is deterministic") {
  ParallelCorpus corpus = gen_parallel_corpus(17, 33, 16);
  Vocabulary vocab = Vocabulary::build({"abcdefghijklmnopqrstuvwxyz .!?AZ"});
  AssembleOptions opts;
  auto datasets =
      assemble_training_set(corpus.train, Setting::AugmentC, vocab, opts);
  auto sched = schedule_batches(datasets, 4, 5);
  // Multiset of scheduled batch refs equals the union of all batches.
  std::map<std::pair<int, int>, int> seen;
  for (const auto& ref : sched.order) ++seen[{ref.dataset, ref.batch}];
  size_t total = 0;
  for (size_t d = 0; d < sched.batches.size(); ++d) {
    total += sched.batches[d].size();
    for (size_t b = 0; b < sched.batches[d].size(); ++b) {
      CHECK(seen[{static_cast<int>(d), static_cast<int>(b)}] == 1);
    }
  }
  CHECK(sched.order.size() == total);
  // Every sample of every dataset appears exactly once across its batches.
  for (size_t d = 0; d < sched.batches.size(); ++d) {
    std::set<int> ids;
    size_t n = 0;
    for (const auto& batch : sched.batches[d])
      for (int i : batch) {
        ids.insert(i);
        ++n;
      }
    CHECK(n == datasets[d].samples.size());
    CHECK(ids.size() == n);
  }

  auto again = schedule_batches(datasets, 4, 5);
  REQUIRE(again.order.size() == sched.order.size());
  for (size_t i = 0; i < sched.order.size(); ++i) {
    CHECK(again.order[i].dataset == sched.order[i].dataset);
    CHECK(again.order[i].batch == sched.order[i].batch);
  }
  CHECK(again.batches == sched.batches);

  Dataset empty{"empty", "SRC-text->TGT-text", false, {}};
  CHECK_THROWS_AS(schedule_batches({empty}, 4, 1), ArgumentError);
}

TEST_CASE("take_portion sizes") {
  ParallelCorpus corpus = gen_parallel_corpus(19, 40, 16);
  CHECK(take_portion(corpus.train, 0.1, 1).size() ==
        (corpus.train.size() + 9) / 10);
  CHECK(take_portion(corpus.train, 1.0, 1).size() == corpus.train.size());
  CHECK_THROWS_AS(take_portion(corpus.train, 0.0, 1), ArgumentError);
}

TEST_CASE("corpus manifest and frames sidecar round trip") {
  ParallelCorpus corpus = gen_parallel_corpus(23, 12, 14);
  std::vector<std::string> texts;
  for (const auto& p : corpus.train) {
    texts.push_back(p.src.text);
    texts.push_back(p.tgt.text);
    texts.push_back(reverse_language(p.src).text);
  }
  Vocabulary vocab = Vocabulary::build(texts);
  AssembleOptions opts;
  std::vector<SplitDatasets> splits;
  splits.push_back(
      {"train",
       assemble_training_set(corpus.train, Setting::Plain, vocab, opts)});
  splits.push_back(
      {"valid",
       assemble_training_set(corpus.valid, Setting::Plain, vocab, opts)});

  const std::string manifest = "test_manifest.tsv";
  const std::string frames = "test_frames.bin";
  write_corpus_files(manifest, frames, splits);
  auto loaded = read_corpus_files(manifest, frames, vocab);

  REQUIRE(loaded.size() == splits.size());
  for (size_t si = 0; si < splits.size(); ++si) {
    REQUIRE(loaded[si].datasets.size() == splits[si].datasets.size());
    for (size_t di = 0; di < splits[si].datasets.size(); ++di) {
      const auto& a = splits[si].datasets[di];
      const auto& b = loaded[si].datasets[di];
      CHECK(b.direction == a.direction);
      CHECK(b.asr_like == a.asr_like);
      REQUIRE(b.samples.size() == a.samples.size());
      for (size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(b.samples[i].output_ids == a.samples[i].output_ids);
        CHECK(b.samples[i].target_lang == a.samples[i].target_lang);
        CHECK(b.samples[i].audio_input == a.samples[i].audio_input);
        if (a.samples[i].audio_input) {
          REQUIRE(b.samples[i].frames.n_frames == a.samples[i].frames.n_frames);
          for (size_t k = 0; k < a.samples[i].frames.data.size(); ++k)
            CHECK(b.samples[i].frames.data[k] ==
                  doctest::Approx(a.samples[i].frames.data[k]).epsilon(1e-6));
        } else {
          CHECK(b.samples[i].input_ids == a.samples[i].input_ids);
        }
      }
    }
  }
  std::remove(manifest.c_str());
  std::remove(frames.c_str());
}
