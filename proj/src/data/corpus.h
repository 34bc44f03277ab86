// src/data/corpus.h
//
// Synthetic parallel corpus: a seeded bijective word lexicon between SRC and
// TGT, sentence generation with reversed word order on the TGT side (so the
// task cannot be solved by transcription alone), and the character-reversed
// artificial language SRC-R.

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/rng.h"

namespace zs::data {

enum class Lang { SRC, TGT, SRCR };

const char* lang_name(Lang lang);            // "SRC" / "TGT" / "SRC-R"
Lang lang_from_name(const std::string& name);

struct Sentence {
  std::string text;
  Lang lang = Lang::SRC;
};

struct SentencePair {
  Sentence src;
  Sentence tgt;
};

struct Lexicon {
  std::vector<std::string> src_words;
  std::vector<std::string> tgt_words;  // tgt_words[i] translates src_words[i]

  const std::string& translate(const std::string& src_word) const;
  std::vector<std::string> reversed_src_words() const;  // the SRC-R lexicon

 private:
  mutable std::unordered_map<std::string, size_t> index_;
};

struct ParallelCorpus {
  Lexicon lexicon;
  std::vector<SentencePair> train;
  std::vector<SentencePair> valid;
  std::vector<SentencePair> test;
};

struct CorpusOptions {
  int sent_len_min = 2;  // words per sentence
  int sent_len_max = 5;
  int word_len_min = 2;
  int word_len_max = 5;
  // Fraction of lexicon entries whose TGT word equals the SRC word, so the
  // both-languages token bucket is populated.
  double cognate_fraction = 0.2;
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
};

// Deterministic given seed; sentences are unique across all splits.
ParallelCorpus gen_parallel_corpus(uint64_t seed, int size, int lexicon_size,
                                   CorpusOptions opts = {});

// Character-wise reversal with casing/punctuation restoration: reverse,
// lowercase and strip punctuation (collapsing whitespace), capitalize the
// first letter and re-append the original terminal punctuation.
Sentence reverse_language(const Sentence& sentence);

// Lowercase words of a sentence with punctuation stripped (the word stream
// used by lexicon membership and WER-style normalization).
std::vector<std::string> content_words(const std::string& text);

}  // namespace zs::data
