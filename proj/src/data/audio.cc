// src/data/audio.cc

#include "data/audio.h"

#include "core/error.h"
#include "core/rng.h"

namespace zs::data {

namespace {
constexpr uint64_t kCodebookSeed = 0x5eedc0debeefull;
}

std::vector<double> codebook_vector(char c, int dim) {
  if (c < 32 || c > 126)
    throw ArgumentError(std::string("render: character code ") +
                        std::to_string(static_cast<int>(c)) +
                        " outside the codebook (printable ASCII only)");
  if (dim < 1) throw ArgumentError("codebook_vector: dim must be positive");
  core::Rng rng = core::Rng(kCodebookSeed).child(static_cast<uint64_t>(c));
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.normal();
  return v;
}

UtteranceFrames render_pseudo_audio(const std::string& sentence, uint64_t seed,
                                    double noise_sigma, int dim) {
  if (noise_sigma < 0.0)
    throw ArgumentError("render_pseudo_audio: negative noise sigma");
  core::Rng rng = core::Rng(seed).child("pseudo-audio");
  UtteranceFrames utt;
  utt.dim = dim;
  utt.source_text = sentence;
  utt.data.reserve(sentence.size() * kMaxRepeat * dim);
  for (char c : sentence) {
    const std::vector<double> base = codebook_vector(c, dim);
    const int64_t repeats = rng.uniform_int(kMinRepeat, kMaxRepeat);
    for (int64_t r = 0; r < repeats; ++r) {
      for (int d = 0; d < dim; ++d) {
        double x = base[d];
        if (noise_sigma > 0.0) x += noise_sigma * rng.normal();
        utt.data.push_back(x);
      }
      ++utt.n_frames;
    }
  }
  return utt;
}

}  // namespace zs::data
