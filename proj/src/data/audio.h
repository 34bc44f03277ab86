// src/data/audio.h
//
// Pseudo-audio rendering: each character has a fixed codebook vector; an
// utterance repeats each character's vector 2-4 times (seeded) and adds
// Gaussian noise. Stands in for speech features at desk scale.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace zs::data {

struct UtteranceFrames {
  int64_t n_frames = 0;
  int64_t dim = 0;
  std::vector<double> data;  // n_frames x dim, row-major
  std::string source_text;

  double at(int64_t frame, int64_t d) const { return data[frame * dim + d]; }
};

inline constexpr int kMinRepeat = 2;
inline constexpr int kMaxRepeat = 4;

// The fixed per-character codebook vector. Supported characters are
// printable ASCII (32..126).
std::vector<double> codebook_vector(char c, int dim);

// Deterministic given (sentence, seed). With sigma == 0 the frames are the
// exact codebook vectors repeated.
UtteranceFrames render_pseudo_audio(const std::string& sentence, uint64_t seed,
                                    double noise_sigma, int dim);

}  // namespace zs::data
