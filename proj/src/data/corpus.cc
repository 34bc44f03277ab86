// src/data/corpus.cc

#include "data/corpus.h"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "core/error.h"

namespace zs::data {

namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)); }

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

std::string capitalize_first(std::string s) {
  for (char& c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      break;
    }
  }
  return s;
}

std::string make_word(core::Rng& rng, int len_min, int len_max) {
  const int64_t len = rng.uniform_int(len_min, len_max);
  std::string w;
  w.reserve(len);
  for (int64_t i = 0; i < len; ++i)
    w.push_back(static_cast<char>('a' + rng.uniform_int(0, 25)));
  return w;
}

std::string render_sentence(const std::vector<std::string>& words, char punct) {
  std::string s;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) s.push_back(' ');
    s += words[i];
  }
  s = capitalize_first(std::move(s));
  s.push_back(punct);
  return s;
}

}  // namespace

const char* lang_name(Lang lang) {
  switch (lang) {
    case Lang::SRC: return "SRC";
    case Lang::TGT: return "TGT";
    case Lang::SRCR: return "SRC-R";
  }
  throw ArgumentError("lang_name: bad enum value");
}

Lang lang_from_name(const std::string& name) {
  if (name == "SRC") return Lang::SRC;
  if (name == "TGT") return Lang::TGT;
  if (name == "SRC-R") return Lang::SRCR;
  throw ArgumentError("unknown language name: " + name);
}

const std::string& Lexicon::translate(const std::string& src_word) const {
  if (index_.empty()) {
    for (size_t i = 0; i < src_words.size(); ++i) index_[src_words[i]] = i;
  }
  auto it = index_.find(src_word);
  if (it == index_.end())
    throw ArgumentError("lexicon: unknown source word '" + src_word + "'");
  return tgt_words[it->second];
}

std::vector<std::string> Lexicon::reversed_src_words() const {
  std::vector<std::string> out;
  out.reserve(src_words.size());
  for (const auto& w : src_words) out.emplace_back(w.rbegin(), w.rend());
  return out;
}

ParallelCorpus gen_parallel_corpus(uint64_t seed, int size, int lexicon_size,
                                   CorpusOptions opts) {
  if (size < 1) throw ArgumentError("gen_parallel_corpus: size must be >= 1");
  if (lexicon_size < 1)
    throw ArgumentError("gen_parallel_corpus: lexicon-size must be >= 1");

  core::Rng lex_rng = core::Rng(seed).child("lexicon");
  ParallelCorpus corpus;
  auto& lex = corpus.lexicon;

  std::set<std::string> used_src;
  while (static_cast<int>(lex.src_words.size()) < lexicon_size) {
    std::string w = make_word(lex_rng, opts.word_len_min, opts.word_len_max);
    if (used_src.insert(w).second) lex.src_words.push_back(w);
  }
  std::set<std::string> used_tgt;
  for (int i = 0; i < lexicon_size; ++i) {
    if (lex_rng.uniform() < opts.cognate_fraction) {
      lex.tgt_words.push_back(lex.src_words[i]);
      used_tgt.insert(lex.src_words[i]);
      continue;
    }
    while (true) {
      std::string w = make_word(lex_rng, opts.word_len_min, opts.word_len_max);
      if (used_src.count(w) || used_tgt.count(w)) continue;
      used_tgt.insert(w);
      lex.tgt_words.push_back(w);
      break;
    }
  }

  core::Rng sent_rng = core::Rng(seed).child("sentences");
  static const char kPunct[] = {'.', '!', '?'};
  std::set<std::string> seen;
  std::vector<SentencePair> pairs;
  int64_t attempts = 0;
  const int64_t max_attempts = 200ll * size + 1000;
  while (static_cast<int>(pairs.size()) < size) {
    if (++attempts > max_attempts)
      throw ArgumentError(
          "gen_parallel_corpus: cannot generate enough unique sentences; "
          "increase lexicon-size or sentence length range");
    const int64_t n_words =
        sent_rng.uniform_int(opts.sent_len_min, opts.sent_len_max);
    std::vector<std::string> src_ws;
    for (int64_t i = 0; i < n_words; ++i)
      src_ws.push_back(
          lex.src_words[sent_rng.uniform_int(0, lexicon_size - 1)]);
    const char punct = kPunct[sent_rng.uniform_int(0, 2)];
    std::string src_text = render_sentence(src_ws, punct);
    if (!seen.insert(src_text).second) continue;

    // TGT: word-for-word cipher, then full word-order reversal.
    std::vector<std::string> tgt_ws;
    for (auto it = src_ws.rbegin(); it != src_ws.rend(); ++it)
      tgt_ws.push_back(lex.translate(*it));
    SentencePair pair;
    pair.src = {std::move(src_text), Lang::SRC};
    pair.tgt = {render_sentence(tgt_ws, punct), Lang::TGT};
    pairs.push_back(std::move(pair));
  }

  int n_valid = std::max(0, static_cast<int>(opts.valid_fraction * size + 0.5));
  int n_test = std::max(0, static_cast<int>(opts.test_fraction * size + 0.5));
  if (size >= 3) {
    n_valid = std::max(1, n_valid);
    n_test = std::max(1, n_test);
  }
  const int n_train = size - n_valid - n_test;
  if (n_train < 1)
    throw ArgumentError("gen_parallel_corpus: size too small for the splits");
  corpus.train.assign(pairs.begin(), pairs.begin() + n_train);
  corpus.valid.assign(pairs.begin() + n_train, pairs.begin() + n_train + n_valid);
  corpus.test.assign(pairs.begin() + n_train + n_valid, pairs.end());
  return corpus;
}

Sentence reverse_language(const Sentence& sentence) {
  if (sentence.lang != Lang::SRC)
    throw ArgumentError("reverse_language: input must be a SRC sentence");
  const std::string& in = sentence.text;
  if (in.empty()) return Sentence{"", Lang::SRCR};

  const char terminal = is_terminal(in.back()) ? in.back() : '\0';

  std::string rev(in.rbegin(), in.rend());
  std::string stripped;
  stripped.reserve(rev.size());
  for (char c : rev) {
    if (is_punct(c)) continue;
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!stripped.empty() && stripped.back() != ' ') stripped.push_back(' ');
      continue;
    }
    stripped.push_back(
        static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!stripped.empty() && stripped.back() == ' ') stripped.pop_back();
  while (!stripped.empty() && stripped.front() == ' ') stripped.erase(0, 1);

  std::string out = capitalize_first(std::move(stripped));
  if (terminal) out.push_back(terminal);
  return Sentence{std::move(out), Lang::SRCR};
}

std::vector<std::string> content_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (!is_punct(c)) {
      cur.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush();
  return words;
}

}  // namespace zs::data
