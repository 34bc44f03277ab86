// src/train/checkpoint.cc

#include "train/checkpoint.h"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "core/error.h"

namespace zs::train {

namespace {

constexpr char kMagic[4] = {'Z', 'S', 'X', 'L'};
constexpr uint32_t kVersion = 1;

void put_bytes(std::ostream& os, const void* p, size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u16(std::ostream& os, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  put_bytes(os, b, 2);
}

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(os, b, 4);
}

void put_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(os, b, 8);
}

void put_f32(std::ostream& os, float f) {
  uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(os, v);
}

void put_f64(std::ostream& os, double d) {
  uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

void put_str(std::ostream& os, const std::string& s) {
  if (s.size() > 0xffff)
    throw ArgumentError("checkpoint: string field too long");
  put_u16(os, static_cast<uint16_t>(s.size()));
  put_bytes(os, s.data(), s.size());
}

struct Reader {
  std::istream& is;
  void bytes(void* p, size_t n) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw IntegrityError("checkpoint: truncated file");
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
  float f32() {
    const uint32_t v = u32();
    float f;
    std::memcpy(&f, &v, 4);
    return f;
  }
  double f64() {
    const uint64_t v = u64();
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  std::string str() {
    std::string s(u16(), '\0');
    if (!s.empty()) bytes(s.data(), s.size());
    return s;
  }
};

void write_moments(std::ostream& os,
                   const std::vector<std::vector<double>>& moments) {
  uint64_t total = 0;
  for (const auto& m : moments) total += m.size();
  put_u64(os, total);
  for (const auto& m : moments)
    for (double v : m) put_f32(os, static_cast<float>(v));
}

}  // namespace

void save_checkpoint(const model::Model& model, const data::Vocabulary& vocab,
                     const std::string& path, int epoch, double valid_loss,
                     const core::AdamState* optimizer) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ArgumentError("cannot open checkpoint for writing: " + path);

    put_bytes(os, kMagic, 4);
    put_u32(os, kVersion);

    const auto kv = model.config().to_kv();
    put_u32(os, static_cast<uint32_t>(kv.size()));
    for (const auto& [k, v] : kv) {
      put_str(os, k);
      put_str(os, v);
    }
    put_str(os, vocab.chars());

    const auto& entries = model.params().entries();
    put_u32(os, static_cast<uint32_t>(entries.size()));
    uint64_t offset = 0;
    for (const auto& [name, t] : entries) {
      put_str(os, name);
      os.put(static_cast<char>(t.rank()));
      for (int a = 0; a < t.rank(); ++a)
        put_u32(os, static_cast<uint32_t>(t.dim(a)));
      put_u64(os, offset);
      offset += static_cast<uint64_t>(t.size());
    }
    put_u64(os, offset);
    for (const auto& [name, t] : entries)
      for (double v : t.values()) put_f32(os, static_cast<float>(v));

    os.put(optimizer ? 1 : 0);
    if (optimizer) {
      const auto& cfg = optimizer->config();
      put_f64(os, cfg.beta1);
      put_f64(os, cfg.beta2);
      put_f64(os, cfg.eps);
      put_f64(os, cfg.base_factor);
      put_u64(os, static_cast<uint64_t>(cfg.warmup_steps));
      put_u64(os, static_cast<uint64_t>(cfg.model_dim));
      put_u64(os, static_cast<uint64_t>(optimizer->step()));
      write_moments(os, optimizer->first_moments());
      write_moments(os, optimizer->second_moments());
    }

    put_u32(os, static_cast<uint32_t>(epoch));
    put_f64(os, valid_loss);
    if (!os) throw ArgumentError("checkpoint write failed: " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ArgumentError("checkpoint rename failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArgumentError("cannot open checkpoint: " + path);
  Reader r{is};

  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("checkpoint: bad magic (not a ZSXL file)");
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw VersionError("checkpoint: unsupported format version " +
                       std::to_string(version));

  std::map<std::string, std::string> kv;
  const uint32_t n_kv = r.u32();
  for (uint32_t i = 0; i < n_kv; ++i) {
    std::string k = r.str();
    kv[k] = r.str();
  }

  LoadedCheckpoint out;
  out.config = model::ModelConfig::from_kv(kv);
  out.vocab = data::Vocabulary::from_chars(r.str());

  struct ManifestEntry {
    std::string name;
    core::Shape shape;
    uint64_t offset;
    int64_t size;
  };
  std::vector<ManifestEntry> manifest;
  const uint32_t n_params = r.u32();
  for (uint32_t i = 0; i < n_params; ++i) {
    ManifestEntry e;
    e.name = r.str();
    const int ndim = is.get();
    if (ndim <= 0 || ndim > 4)
      throw IntegrityError("checkpoint: bad rank in manifest");
    e.size = 1;
    for (int a = 0; a < ndim; ++a) {
      const int64_t d = r.u32();
      e.shape.push_back(d);
      e.size *= d;
    }
    e.offset = r.u64();
    manifest.push_back(std::move(e));
  }
  const uint64_t blob_len = r.u64();
  uint64_t expect = 0;
  for (const auto& e : manifest) {
    if (e.offset != expect)
      throw IntegrityError("checkpoint: manifest offsets are not contiguous");
    expect += static_cast<uint64_t>(e.size);
  }
  if (expect != blob_len)
    throw IntegrityError("checkpoint: manifest disagrees with blob length (" +
                         std::to_string(expect) + " vs " +
                         std::to_string(blob_len) + " floats)");

  std::vector<float> blob(blob_len);
  for (auto& f : blob) f = r.f32();

  // Rebuild the model and splice in the stored values.
  out.model = std::make_unique<model::Model>(out.config, /*init_seed=*/0);
  auto& entries = out.model->params().entries();
  if (entries.size() != manifest.size())
    throw IntegrityError("checkpoint: parameter count mismatch (file " +
                         std::to_string(manifest.size()) + ", model " +
                         std::to_string(entries.size()) + ")");
  for (size_t i = 0; i < entries.size(); ++i) {
    auto& [name, t] = entries[i];
    const auto& e = manifest[i];
    if (e.name != name || e.shape != t.shape())
      throw IntegrityError("checkpoint: manifest entry '" + e.name +
                           "' does not match model parameter '" + name + "'");
    auto& vals = t.values();
    for (int64_t j = 0; j < e.size; ++j)
      vals[j] = static_cast<double>(blob[e.offset + j]);
  }

  const int has_opt = is.get();
  if (has_opt == 1) {
    OptimizerBlob opt;
    opt.config.beta1 = r.f64();
    opt.config.beta2 = r.f64();
    opt.config.eps = r.f64();
    opt.config.base_factor = r.f64();
    opt.config.warmup_steps = static_cast<int64_t>(r.u64());
    opt.config.model_dim = static_cast<int64_t>(r.u64());
    opt.step = static_cast<int64_t>(r.u64());
    for (auto* moments : {&opt.first_moments, &opt.second_moments}) {
      const uint64_t total = r.u64();
      uint64_t check = 0;
      for (const auto& e : manifest) check += static_cast<uint64_t>(e.size);
      if (total != check)
        throw IntegrityError("checkpoint: optimizer moment size mismatch");
      for (const auto& e : manifest) {
        std::vector<double> m(e.size);
        for (auto& v : m) v = static_cast<double>(r.f32());
        moments->push_back(std::move(m));
      }
    }
    out.optimizer = std::move(opt);
  } else if (has_opt != 0) {
    throw IntegrityError("checkpoint: bad optimizer flag");
  }

  out.epoch = static_cast<int>(r.u32());
  out.valid_loss = r.f64();
  return out;
}

}  // namespace zs::train
