// src/data/vocab.cc

#include "data/vocab.h"

#include <algorithm>
#include <set>

#include "core/error.h"

namespace zs::data {

Vocabulary Vocabulary::build(const std::vector<std::string>& texts) {
  std::set<char> seen;
  for (const auto& t : texts)
    for (char c : t) seen.insert(c);
  Vocabulary v;
  v.chars_.assign(seen.begin(), seen.end());
  v.rebuild_index();
  return v;
}

Vocabulary Vocabulary::from_chars(std::string chars) {
  std::set<char> seen(chars.begin(), chars.end());
  Vocabulary v;
  v.chars_.assign(seen.begin(), seen.end());
  v.rebuild_index();
  return v;
}

void Vocabulary::rebuild_index() {
  char_to_id_.assign(256, -1);
  for (size_t i = 0; i < chars_.size(); ++i)
    char_to_id_[static_cast<unsigned char>(chars_[i])] =
        kNumReserved + static_cast<int>(i);
}

int Vocabulary::encode_char(char c) const {
  const int id = char_to_id_[static_cast<unsigned char>(c)];
  return id < 0 ? kUnk : id;
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (char c : text) ids.push_back(encode_char(c));
  return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || id >= size())
      throw IndexError("vocab: id " + std::to_string(id) + " out of range");
    if (id < kNumReserved) continue;
    out.push_back(chars_[id - kNumReserved]);
  }
  return out;
}

int Vocabulary::tag_id(Lang lang) {
  switch (lang) {
    case Lang::SRC: return kTagSrc;
    case Lang::TGT: return kTagTgt;
    case Lang::SRCR: return kTagSrcR;
  }
  throw ArgumentError("tag_id: bad enum value");
}

std::string Vocabulary::token_name(int id) {
  switch (id) {
    case kPad: return "<pad>";
    case kBos: return "<bos>";
    case kEos: return "<eos>";
    case kUnk: return "<unk>";
    case kTagSrc: return "<SRC>";
    case kTagTgt: return "<TGT>";
    case kTagSrcR: return "<SRC-R>";
    default: return "char#" + std::to_string(id);
  }
}

}  // namespace zs::data
