// src/cli/config_file.cc

#include "cli/config_file.h"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "core/error.h"

namespace zs::cli {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

using Setter = std::function<void(DeskConfig&, const std::string&)>;

template <typename T>
Setter num_setter(T DeskConfig::* field) {
  return [field](DeskConfig& cfg, const std::string& value) {
    std::istringstream is(value);
    T v{};
    is >> v;
    if (is.fail() || !is.eof())
      throw ArgumentError("config: bad numeric value '" + value + "'");
    cfg.*field = v;
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> kSetters = {
      {"corpus_size", num_setter(&DeskConfig::corpus_size)},
      {"lexicon_size", num_setter(&DeskConfig::lexicon_size)},
      {"cognate_fraction", num_setter(&DeskConfig::cognate_fraction)},
      {"sent_len_min", num_setter(&DeskConfig::sent_len_min)},
      {"sent_len_max", num_setter(&DeskConfig::sent_len_max)},
      {"word_len_min", num_setter(&DeskConfig::word_len_min)},
      {"word_len_max", num_setter(&DeskConfig::word_len_max)},
      {"data_seed", num_setter(&DeskConfig::data_seed)},
      {"feature_dim", num_setter(&DeskConfig::feature_dim)},
      {"noise_sigma", num_setter(&DeskConfig::noise_sigma)},
      {"audio_layers", num_setter(&DeskConfig::audio_layers)},
      {"text_layers", num_setter(&DeskConfig::text_layers)},
      {"decoder_layers", num_setter(&DeskConfig::decoder_layers)},
      {"model_dim", num_setter(&DeskConfig::model_dim)},
      {"inner_dim", num_setter(&DeskConfig::inner_dim)},
      {"heads", num_setter(&DeskConfig::heads)},
      {"dropout", num_setter(&DeskConfig::dropout)},
      {"attn_dropout", num_setter(&DeskConfig::attn_dropout)},
      {"word_dropout", num_setter(&DeskConfig::word_dropout)},
      {"embed_dropout", num_setter(&DeskConfig::embed_dropout)},
      {"label_smoothing", num_setter(&DeskConfig::label_smoothing)},
      {"max_epochs", num_setter(&DeskConfig::max_epochs)},
      {"ft_max_epochs", num_setter(&DeskConfig::ft_max_epochs)},
      {"patience", num_setter(&DeskConfig::patience)},
      {"batch_size", num_setter(&DeskConfig::batch_size)},
      {"warmup_steps", num_setter(&DeskConfig::warmup_steps)},
      {"adam_base_factor", num_setter(&DeskConfig::adam_base_factor)},
      {"clip_norm", num_setter(&DeskConfig::clip_norm)},
      {"eval_max_len", num_setter(&DeskConfig::eval_max_len)},
      {"analysis_max_sentences", num_setter(&DeskConfig::analysis_max_sentences)},
      {"svcca_variance_kept", num_setter(&DeskConfig::svcca_variance_kept)},
      {"probe_iterations", num_setter(&DeskConfig::probe_iterations)},
      {"probe_learning_rate", num_setter(&DeskConfig::probe_learning_rate)},
  };
  return kSetters;
}

}  // namespace

void DeskConfig::validate() const {
  auto want = [](bool ok, const char* key, const char* what) {
    if (!ok)
      throw ArgumentError(std::string("config key '") + key + "': " + what);
  };
  want(corpus_size >= 10, "corpus_size", "must be at least 10");
  want(lexicon_size >= 2, "lexicon_size", "must be at least 2");
  want(cognate_fraction >= 0 && cognate_fraction <= 1, "cognate_fraction",
       "must be in [0, 1]");
  want(sent_len_min >= 1 && sent_len_max >= sent_len_min, "sent_len_min",
       "need 1 <= min <= max");
  want(word_len_min >= 1 && word_len_max >= word_len_min, "word_len_min",
       "need 1 <= min <= max");
  want(feature_dim >= 1, "feature_dim", "must be positive");
  want(noise_sigma >= 0, "noise_sigma", "must be non-negative");
  want(audio_layers >= 1 && text_layers >= 1 && text_layers <= audio_layers,
       "text_layers", "need 1 <= text_layers <= audio_layers");
  want(decoder_layers >= 1, "decoder_layers", "must be positive");
  want(model_dim >= 2 && heads >= 1 && model_dim % heads == 0, "model_dim",
       "must be divisible by heads");
  want(inner_dim >= 1, "inner_dim", "must be positive");
  want(max_epochs >= 1 && ft_max_epochs >= 1, "max_epochs", "must be positive");
  want(patience >= 1, "patience", "must be at least 1");
  want(batch_size >= 1, "batch_size", "must be positive");
  want(warmup_steps >= 1, "warmup_steps", "must be positive");
  want(adam_base_factor > 0, "adam_base_factor", "must be positive");
  want(eval_max_len >= 4, "eval_max_len", "must be at least 4");
  want(analysis_max_sentences >= 10, "analysis_max_sentences",
       "must be at least 10");
  want(svcca_variance_kept > 0 && svcca_variance_kept <= 1,
       "svcca_variance_kept", "must be in (0, 1]");
  want(probe_iterations >= 1, "probe_iterations", "must be positive");
  want(probe_learning_rate > 0, "probe_learning_rate", "must be positive");
}

DeskConfig parse_config_text(const std::string& text,
                             const std::string& origin) {
  DeskConfig cfg;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError(origin + ":" + std::to_string(line_no) +
                          ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end())
      throw ArgumentError(origin + ":" + std::to_string(line_no) +
                          ": unknown config key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const ArgumentError& e) {
      throw ArgumentError(origin + ":" + std::to_string(line_no) + ": " +
                          e.what());
    }
  }
  cfg.validate();
  return cfg;
}

DeskConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ArgumentError("cannot open config file: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string default_config_text() {
  const DeskConfig cfg;
  std::ostringstream os;
  os << "# Desk-scale run configuration. Every key is optional; these are\n"
     << "# the defaults.\n\n";
  os << "corpus_size = " << cfg.corpus_size << "\n";
  os << "lexicon_size = " << cfg.lexicon_size << "\n";
  os << "cognate_fraction = " << cfg.cognate_fraction << "\n";
  os << "sent_len_min = " << cfg.sent_len_min << "\n";
  os << "sent_len_max = " << cfg.sent_len_max << "\n";
  os << "word_len_min = " << cfg.word_len_min << "\n";
  os << "word_len_max = " << cfg.word_len_max << "\n";
  os << "data_seed = " << cfg.data_seed << "\n";
  os << "feature_dim = " << cfg.feature_dim << "\n";
  os << "noise_sigma = " << cfg.noise_sigma << "\n\n";
  os << "audio_layers = " << cfg.audio_layers << "\n";
  os << "text_layers = " << cfg.text_layers << "\n";
  os << "decoder_layers = " << cfg.decoder_layers << "\n";
  os << "model_dim = " << cfg.model_dim << "\n";
  os << "inner_dim = " << cfg.inner_dim << "\n";
  os << "heads = " << cfg.heads << "\n";
  os << "dropout = " << cfg.dropout << "\n";
  os << "attn_dropout = " << cfg.attn_dropout << "\n";
  os << "word_dropout = " << cfg.word_dropout << "\n";
  os << "embed_dropout = " << cfg.embed_dropout << "\n";
  os << "label_smoothing = " << cfg.label_smoothing << "\n\n";
  os << "max_epochs = " << cfg.max_epochs << "\n";
  os << "ft_max_epochs = " << cfg.ft_max_epochs << "\n";
  os << "patience = " << cfg.patience << "\n";
  os << "batch_size = " << cfg.batch_size << "\n";
  os << "warmup_steps = " << cfg.warmup_steps << "\n";
  os << "adam_base_factor = " << cfg.adam_base_factor << "\n";
  os << "clip_norm = " << cfg.clip_norm << "\n\n";
  os << "eval_max_len = " << cfg.eval_max_len << "\n";
  os << "analysis_max_sentences = " << cfg.analysis_max_sentences << "\n";
  os << "svcca_variance_kept = " << cfg.svcca_variance_kept << "\n";
  os << "probe_iterations = " << cfg.probe_iterations << "\n";
  os << "probe_learning_rate = " << cfg.probe_learning_rate << "\n";
  return os.str();
}

uint64_t fnv1a(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : data) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace zs::cli
