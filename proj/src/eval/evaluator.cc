// src/eval/evaluator.cc

#include "eval/evaluator.h"

#include "core/error.h"

namespace zs::eval {

EvalTexts decode_direction(model::Model& model,
                           const std::vector<data::SentencePair>& pairs,
                           data::Direction direction,
                           const data::Vocabulary& vocab,
                           const DecodeOptions& opts) {
  data::AssembleOptions aopts;
  aopts.noise_sigma = opts.noise_sigma;
  aopts.feature_dim = opts.feature_dim;
  aopts.seed = opts.render_seed;
  data::Dataset ds =
      data::build_direction_dataset(direction, pairs, vocab, aopts);

  EvalTexts out;
  out.references.reserve(ds.samples.size());
  out.hypotheses.reserve(ds.samples.size());
  for (const auto& s : ds.samples) {
    model::EncoderOutput enc =
        s.audio_input
            ? model.encode_audio(s.frames, s.target_lang, model::Mode::Eval)
            : model.encode_text(s.input_ids, s.target_lang, model::Mode::Eval);
    const auto ids = model.greedy_decode(enc, s.target_lang, opts.max_len);
    out.references.push_back(s.output_text);
    out.hypotheses.push_back(vocab.decode(ids));
  }
  return out;
}

CascadeResult cascade_translate(model::Model& asr_model,
                                model::Model& mt_model,
                                const data::UtteranceFrames& audio,
                                const data::Vocabulary& vocab, int max_len) {
  CascadeResult result;
  try {
    auto enc = asr_model.encode_audio(audio, data::Lang::SRC, model::Mode::Eval);
    result.transcript =
        vocab.decode(asr_model.greedy_decode(enc, data::Lang::SRC, max_len));
  } catch (const Error& e) {
    throw Error(std::string("cascade: ASR stage failed: ") + e.what());
  }
  if (result.transcript.empty()) return result;
  try {
    auto enc = mt_model.encode_text(vocab.encode(result.transcript),
                                    data::Lang::TGT, model::Mode::Eval);
    result.translation =
        vocab.decode(mt_model.greedy_decode(enc, data::Lang::TGT, max_len));
  } catch (const Error& e) {
    throw Error(std::string("cascade: MT stage failed: ") + e.what());
  }
  return result;
}

}  // namespace zs::eval
