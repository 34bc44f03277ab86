// src/eval/metrics.cc

#include "eval/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "core/error.h"

namespace zs::eval {

namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)); }

void check_aligned(const char* op, size_t refs, size_t hyps) {
  if (refs != hyps)
    throw ArgumentError(std::string(op) + ": " + std::to_string(refs) +
                        " references vs " + std::to_string(hyps) +
                        " hypotheses");
}

}  // namespace

std::vector<std::string> wer_normalize(const std::string& text) {
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
    } else if (!is_punct(c) || c == '\'' || c == '-') {
      cur.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush();
  return words;
}

int64_t word_edit_distance(const std::vector<std::string>& ref,
                           const std::vector<std::string>& hyp) {
  const size_t n = ref.size(), m = hyp.size();
  std::vector<int64_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int64_t>(i);
    for (size_t j = 1; j <= m; ++j) {
      const int64_t sub = prev[j - 1] + (ref[i - 1] != hyp[j - 1]);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double wer(const std::vector<std::string>& references,
           const std::vector<std::string>& hypotheses) {
  if (references.empty()) throw ArgumentError("wer: empty reference corpus");
  check_aligned("wer", references.size(), hypotheses.size());
  int64_t errors = 0, ref_words = 0;
  for (size_t i = 0; i < references.size(); ++i) {
    const auto ref = wer_normalize(references[i]);
    const auto hyp = wer_normalize(hypotheses[i]);
    errors += word_edit_distance(ref, hyp);
    ref_words += static_cast<int64_t>(ref.size());
  }
  if (ref_words == 0)
    throw ArgumentError("wer: reference corpus has no words after normalization");
  return 100.0 * static_cast<double>(errors) / static_cast<double>(ref_words);
}

std::vector<std::string> bleu_tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string word;
  size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])))
      ++j;
    // chunk [i, j): peel leading and trailing punctuation characters.
    size_t a = i, b = j;
    while (a < b && is_punct(text[a])) tokens.push_back(std::string(1, text[a++]));
    size_t trail_start = b;
    while (trail_start > a && is_punct(text[trail_start - 1])) --trail_start;
    if (trail_start > a) tokens.push_back(text.substr(a, trail_start - a));
    for (size_t k = trail_start; k < b; ++k)
      tokens.push_back(std::string(1, text[k]));
    i = j;
  }
  return tokens;
}

double bleu(const std::vector<std::string>& references,
            const std::vector<std::string>& hypotheses) {
  check_aligned("bleu", references.size(), hypotheses.size());
  if (references.empty()) throw ArgumentError("bleu: empty corpus");
  constexpr int kMaxOrder = 4;
  int64_t matches[kMaxOrder] = {0, 0, 0, 0};
  int64_t candidates[kMaxOrder] = {0, 0, 0, 0};
  int64_t ref_len = 0, hyp_len = 0;

  using Counts = std::map<std::vector<std::string>, int64_t>;
  auto ngram_counts = [](const std::vector<std::string>& toks, int n) {
    Counts c;
    if (static_cast<int>(toks.size()) >= n)
      for (size_t i = 0; i + n <= toks.size(); ++i)
        ++c[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
    return c;
  };

  for (size_t s = 0; s < references.size(); ++s) {
    const auto ref = bleu_tokenize(references[s]);
    const auto hyp = bleu_tokenize(hypotheses[s]);
    ref_len += static_cast<int64_t>(ref.size());
    hyp_len += static_cast<int64_t>(hyp.size());
    for (int n = 1; n <= kMaxOrder; ++n) {
      const Counts rc = ngram_counts(ref, n);
      const Counts hc = ngram_counts(hyp, n);
      for (const auto& [gram, cnt] : hc) {
        candidates[n - 1] += cnt;
        auto it = rc.find(gram);
        if (it != rc.end()) matches[n - 1] += std::min(cnt, it->second);
      }
    }
  }

  if (hyp_len == 0) return 0.0;
  if (matches[0] == 0) return 0.0;

  double log_precision = 0.0;
  for (int n = 1; n <= kMaxOrder; ++n) {
    double m = static_cast<double>(matches[n - 1]);
    double c = static_cast<double>(candidates[n - 1]);
    if (n >= 2 && matches[n - 1] == 0) {
      m += 1.0;
      c += 1.0;
    }
    log_precision += std::log(m / c);
  }
  const double bp =
      hyp_len >= ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) /
                               static_cast<double>(hyp_len));
  return 100.0 * bp * std::exp(log_precision / kMaxOrder);
}

TokenLanguageStats token_language_stats(
    const std::vector<std::string>& hypotheses,
    const std::set<std::string>& src_vocab,
    const std::set<std::string>& tgt_vocab,
    const std::set<std::string>& exclude_vocab) {
  TokenLanguageStats stats;
  int64_t both = 0, src_only = 0, tgt_only = 0;
  for (const auto& hyp : hypotheses) {
    for (const auto& word : wer_normalize(hyp)) {
      const bool in_src = src_vocab.count(word) != 0;
      const bool in_tgt = tgt_vocab.count(word) != 0;
      if (!in_src && !in_tgt && exclude_vocab.count(word)) {
        ++stats.excluded;
        continue;
      }
      ++stats.counted;
      if (in_src && in_tgt)
        ++both;
      else if (in_src)
        ++src_only;
      else if (in_tgt)
        ++tgt_only;
    }
  }
  if (stats.counted > 0) {
    const double denom = static_cast<double>(stats.counted);
    stats.both_pct = 100.0 * static_cast<double>(both) / denom;
    stats.src_only_pct = 100.0 * static_cast<double>(src_only) / denom;
    stats.tgt_only_pct = 100.0 * static_cast<double>(tgt_only) / denom;
  }
  return stats;
}

void MetricsReport::add(const std::string& task, const std::string& metric,
                        double value, int64_t count) {
  entries.push_back({task, metric, value, count});
}

bool MetricsReport::has(const std::string& task,
                        const std::string& metric) const {
  for (const auto& e : entries)
    if (e.task == task && e.metric == metric) return true;
  return false;
}

double MetricsReport::get(const std::string& task,
                          const std::string& metric) const {
  for (const auto& e : entries)
    if (e.task == task && e.metric == metric) return e.value;
  throw ArgumentError("metrics report: no entry for task=" + task +
                      " metric=" + metric);
}

void write_metrics(const std::string& path, const MetricsReport& report) {
  std::ofstream os(path);
  if (!os) throw ArgumentError("cannot open metrics file for writing: " + path);
  char buf[256];
  for (const auto& e : report.entries) {
    std::snprintf(buf, sizeof(buf), "task=%s metric=%s value=%.6f count=%lld",
                  e.task.c_str(), e.metric.c_str(), e.value,
                  static_cast<long long>(e.count));
    os << buf << '\n';
  }
}

MetricsReport read_metrics(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ArgumentError("cannot open metrics file: " + path);
  MetricsReport report;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    MetricEntry e;
    char task[128], metric[128];
    long long count = 0;
    if (std::sscanf(line.c_str(), "task=%127s metric=%127s value=%lf count=%lld",
                    task, metric, &e.value, &count) != 4)
      throw FormatError("metrics file: bad record: " + line);
    e.task = task;
    e.metric = metric;
    e.count = count;
    report.entries.push_back(std::move(e));
  }
  return report;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ArgumentError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return lines;
}

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  std::ofstream os(path);
  if (!os) throw ArgumentError("cannot open file for writing: " + path);
  for (const auto& l : lines) os << l << '\n';
}

}  // namespace zs::eval
