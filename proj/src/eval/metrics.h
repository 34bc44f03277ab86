// src/eval/metrics.h
//
// Corpus metrics. WER: lowercased, punctuation removed except apostrophes
// and hyphens, whitespace tokenized, word-level edit distance aggregated
// over the corpus (sum of distances / sum of reference lengths). BLEU:
// case-sensitive corpus BLEU-4 with brevity penalty; when a higher-order
// n-gram (n >= 2) has zero matches its precision falls back to add-one
// smoothing, (matches + 1) / (candidates + 1).

#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace zs::eval {

// Lowercase, strip punctuation except ' and -, split on whitespace.
std::vector<std::string> wer_normalize(const std::string& text);

// Word-level Levenshtein distance (substitutions + deletions + insertions).
int64_t word_edit_distance(const std::vector<std::string>& ref,
                           const std::vector<std::string>& hyp);

// Corpus WER percentage; may exceed 100.
double wer(const std::vector<std::string>& references,
           const std::vector<std::string>& hypotheses);

// Whitespace tokens with leading/trailing punctuation characters split off
// as their own tokens; case preserved.
std::vector<std::string> bleu_tokenize(const std::string& text);

// Corpus BLEU-4 in [0, 100].
double bleu(const std::vector<std::string>& references,
            const std::vector<std::string>& hypotheses);

struct TokenLanguageStats {
  double both_pct = 0.0;
  double src_only_pct = 0.0;
  double tgt_only_pct = 0.0;
  int64_t counted = 0;   // tokens in the percentage denominator
  int64_t excluded = 0;  // SRC-R-only tokens left out of the statistics
};

// Word-level lexicon membership over the hypothesis corpus. Words found
// only in `exclude_vocab` (the SRC-R lexicon) are excluded from both the
// buckets and the denominator; in-neither words count toward the
// denominator only, so the three buckets may sum below 100.
TokenLanguageStats token_language_stats(
    const std::vector<std::string>& hypotheses,
    const std::set<std::string>& src_vocab,
    const std::set<std::string>& tgt_vocab,
    const std::set<std::string>& exclude_vocab = {});

struct MetricEntry {
  std::string task;
  std::string metric;
  double value = 0.0;
  int64_t count = 0;
};

struct MetricsReport {
  std::vector<MetricEntry> entries;

  void add(const std::string& task, const std::string& metric, double value,
           int64_t count);
  bool has(const std::string& task, const std::string& metric) const;
  double get(const std::string& task, const std::string& metric) const;
};

void write_metrics(const std::string& path, const MetricsReport& report);
MetricsReport read_metrics(const std::string& path);

std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

}  // namespace zs::eval
