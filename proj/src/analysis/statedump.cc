// src/analysis/statedump.cc

#include "analysis/statedump.h"

#include <cstring>
#include <fstream>

#include "core/error.h"

namespace zs::analysis {

namespace {

constexpr char kMagic[4] = {'Z', 'S', 'S', 'D'};
constexpr uint32_t kVersion = 1;

void put_u16(std::ostream& os, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

void put_u32(std::ostream& os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void put_u64(std::ostream& os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

void put_block(std::ostream& os, const Mat& m) {
  for (double d : m.v) {
    const float f = static_cast<float>(d);
    uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32(os, u);
  }
}

struct Reader {
  std::istream& is;
  void bytes(void* p, size_t n) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw IntegrityError("state dump: truncated file");
  }
  uint16_t u16() {
    unsigned char b[2];
    bytes(b, 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
  }
  uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::string str() {
    std::string s(u16(), '\0');
    if (!s.empty()) bytes(s.data(), s.size());
    return s;
  }
  void block(Mat& m) {
    for (double& d : m.v) {
      const uint32_t u = u32();
      float f;
      std::memcpy(&f, &u, 4);
      d = static_cast<double>(f);
    }
  }
};

model::EncoderOutput encode_view(model::Model& model, const View& view,
                                 const data::SentencePair& pair,
                                 const data::Vocabulary& vocab,
                                 const ExportOptions& opts, uint64_t utt_seed) {
  const std::string text = [&] {
    switch (view.side) {
      case data::Lang::SRC: return pair.src.text;
      case data::Lang::TGT: return pair.tgt.text;
      case data::Lang::SRCR: return data::reverse_language(pair.src).text;
    }
    throw ArgumentError("encode_view: bad enum value");
  }();
  if (view.audio) {
    auto frames = data::render_pseudo_audio(text, utt_seed, opts.noise_sigma,
                                            opts.feature_dim);
    return model.encode_audio(frames, view.tag, model::Mode::Eval);
  }
  return model.encode_text(vocab.encode(text), view.tag, model::Mode::Eval);
}

void append_pooled_row(Mat& m, const model::EncoderOutput& enc) {
  auto pooled = model::Model::mean_pool(enc);
  m.v.insert(m.v.end(), pooled.values().begin(), pooled.values().end());
  ++m.rows;
}

void append_token_rows(Mat& m, const model::EncoderOutput& enc,
                       bool exclude_tag) {
  const int64_t d = enc.states.cols();
  for (int64_t t = exclude_tag ? 1 : 0; t < enc.states.rows(); ++t) {
    if (!enc.mask[t]) continue;
    for (int64_t j = 0; j < d; ++j) m.v.push_back(enc.states.at(t, j));
    ++m.rows;
  }
}

}  // namespace

std::string View::name() const {
  std::string n = lang_name(side);
  n += audio ? "-audio" : "-text";
  n += "@";
  n += lang_name(tag);
  return n;
}

void write_state_dump(const std::string& path, const StateDump& dump) {
  if (dump.x.cols != dump.y.cols)
    throw ArgumentError("state dump: views have different dims");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ArgumentError("cannot open state dump for writing: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u64(os, static_cast<uint64_t>(dump.x.rows));
  put_u64(os, static_cast<uint64_t>(dump.y.rows));
  put_u64(os, static_cast<uint64_t>(dump.x.cols));
  put_u16(os, static_cast<uint16_t>(dump.view_x.size()));
  os.write(dump.view_x.data(), static_cast<std::streamsize>(dump.view_x.size()));
  put_u16(os, static_cast<uint16_t>(dump.view_y.size()));
  os.write(dump.view_y.data(), static_cast<std::streamsize>(dump.view_y.size()));
  put_block(os, dump.x);
  put_block(os, dump.y);
  if (!os) throw ArgumentError("state dump write failed: " + path);
}

StateDump read_state_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArgumentError("cannot open state dump: " + path);
  Reader r{is};
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("state dump: bad magic (not a ZSSD file)");
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw VersionError("state dump: unsupported version " +
                       std::to_string(version));
  StateDump dump;
  const int64_t nx = static_cast<int64_t>(r.u64());
  const int64_t ny = static_cast<int64_t>(r.u64());
  const int64_t d = static_cast<int64_t>(r.u64());
  dump.view_x = r.str();
  dump.view_y = r.str();
  dump.x = Mat(nx, d);
  dump.y = Mat(ny, d);
  r.block(dump.x);
  r.block(dump.y);
  return dump;
}

ExportResult export_pooled_states(model::Model& model,
                                  const std::vector<data::SentencePair>& pairs,
                                  const View& a, const View& b,
                                  const data::Vocabulary& vocab,
                                  const ExportOptions& opts) {
  core::NoGradGuard no_grad;
  ExportResult result;
  result.dump.view_x = a.name();
  result.dump.view_y = b.name();
  const int64_t d = model.config().model_dim;
  result.dump.x.cols = d;
  result.dump.y.cols = d;
  core::Rng rng = core::Rng(opts.render_seed).child("export");
  for (const auto& pair : pairs) {
    const uint64_t sa = rng.next_u64();
    const uint64_t sb = rng.next_u64();
    try {
      auto ea = encode_view(model, a, pair, vocab, opts, sa);
      auto eb = encode_view(model, b, pair, vocab, opts, sb);
      append_pooled_row(result.dump.x, ea);
      append_pooled_row(result.dump.y, eb);
    } catch (const ArgumentError&) {
      ++result.skipped;  // view unavailable for this sentence
    }
  }
  return result;
}

ExportResult export_token_states(model::Model& model,
                                 const std::vector<data::SentencePair>& pairs,
                                 const View& a, const View& b,
                                 const data::Vocabulary& vocab,
                                 const ExportOptions& opts) {
  core::NoGradGuard no_grad;
  ExportResult result;
  result.dump.view_x = a.name();
  result.dump.view_y = b.name();
  const int64_t d = model.config().model_dim;
  result.dump.x.cols = d;
  result.dump.y.cols = d;
  core::Rng rng = core::Rng(opts.render_seed).child("export-tokens");
  for (const auto& pair : pairs) {
    const uint64_t sa = rng.next_u64();
    const uint64_t sb = rng.next_u64();
    try {
      auto ea = encode_view(model, a, pair, vocab, opts, sa);
      auto eb = encode_view(model, b, pair, vocab, opts, sb);
      append_token_rows(result.dump.x, ea, opts.exclude_tag_position);
      append_token_rows(result.dump.y, eb, opts.exclude_tag_position);
    } catch (const ArgumentError&) {
      ++result.skipped;
    }
  }
  return result;
}

}  // namespace zs::analysis
