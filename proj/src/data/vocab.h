// src/data/vocab.h
//
// Character-level vocabulary with fixed reserved ids:
//   0 <pad>  1 <bos>  2 <eos>  3 <unk>  4 <SRC>  5 <TGT>  6 <SRC-R>
// Characters follow, sorted by code point, so ids are stable across runs
// fed the same corpora.

#pragma once

#include <string>
#include <vector>

#include "data/corpus.h"

namespace zs::data {

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kTagSrc = 4;
  static constexpr int kTagTgt = 5;
  static constexpr int kTagSrcR = 6;
  static constexpr int kNumReserved = 7;

  Vocabulary() = default;
  static Vocabulary build(const std::vector<std::string>& texts);
  static Vocabulary from_chars(std::string chars);

  int size() const { return kNumReserved + static_cast<int>(chars_.size()); }
  const std::string& chars() const { return chars_; }

  int encode_char(char c) const;  // <unk> for unseen characters
  std::vector<int> encode(const std::string& text) const;
  // Maps ids back to text; reserved ids are skipped.
  std::string decode(const std::vector<int>& ids) const;

  static int tag_id(Lang lang);
  static bool is_tag(int id) { return id >= kTagSrc && id <= kTagSrcR; }
  static std::string token_name(int id);  // for diagnostics

 private:
  std::string chars_;            // sorted unique characters
  std::vector<int> char_to_id_;  // 256 entries, -1 when absent
  void rebuild_index();
};

}  // namespace zs::data
