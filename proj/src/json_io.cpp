#include "extsum/json_io.hpp"

#include <cstdint>
#include <set>

namespace extsum {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_, "expected an object");
  }

  template <typename T>
  void Get(const char* key, T& out) {
    known_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError(Path(key), "expected a boolean");
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!it->is_number_integer() || it->template get<std::int64_t>() < 0) {
          throw ConfigError(Path(key), "expected a non-negative integer");
        }
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ConfigError(Path(key), "expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError(Path(key), "expected a number");
      }
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(Path(key), e.what());
    }
  }

  template <typename Enum, typename Parse>
  void GetEnum(const char* key, Enum& out, Parse parse) {
    std::string s;
    known_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_string()) throw ConfigError(Path(key), "expected a string");
    try {
      out = parse(it->get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(Path(key), e.what());
    }
  }

  void RejectUnknown() const {
    for (const auto& [k, v] : j_.items()) {
      if (!known_.count(k)) throw ConfigError(Path(k), "unknown key");
    }
  }

  std::string Path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> known_;
};

template <typename Fn>
void Validated(const std::string& prefix, Fn&& validate) {
  try {
    validate();
  } catch (const std::invalid_argument& e) {
    // Validation messages start with the offending field name.
    std::string msg = e.what();
    const auto space = msg.find(' ');
    throw ConfigError(prefix + "." + msg.substr(0, space), msg);
  }
}

}  // namespace

json ToJson(const ModelConfig& c) {
  return {{"embed_dim", c.embed_dim},
          {"hidden_dim", c.hidden_dim},
          {"vocab_size", c.vocab_size},
          {"max_input_chars", c.max_input_chars},
          {"max_target_chars", c.max_target_chars},
          {"batch_size", c.batch_size},
          {"extractor_head", std::string(ToString(c.extractor_head))},
          {"encoder_kind", std::string(ToString(c.encoder_kind))},
          {"use_extractor", c.use_extractor},
          {"use_positions", c.use_positions},
          {"num_aspects", c.num_aspects},
          {"seed", c.seed},
          {"init_scale", c.init_scale}};
}

json ToJson(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"clip_norm", c.clip_norm},
          {"eval_every", c.eval_every},
          {"seed", c.seed},
          {"ext_weight", c.ext_weight},
          {"max_steps", c.max_steps},
          {"null_aspect_baseline", c.null_aspect_baseline},
          {"null_aspect_drop", c.null_aspect_drop}};
}

json ToJson(const DecodeConfig& c) {
  return {{"beam_size", c.beam_size},
          {"max_decode_len", c.max_decode_len},
          {"length_penalty", c.length_penalty}};
}

json ToJson(const TrainReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"step", s.step}, {"loss", s.loss}, {"loss_ext", s.loss_ext},
                     {"loss_gen", s.loss_gen}});
  }
  json dev = json::array();
  for (const auto& d : r.dev_history) {
    dev.push_back({{"step", d.step}, {"perplexity", d.perplexity}});
  }
  return {{"steps", steps},
          {"dev_history", dev},
          {"best_step", r.best_step},
          {"best_perplexity", r.best_perplexity},
          {"best_checkpoint", r.best_checkpoint}};
}

ModelConfig ModelConfigFromJson(const json& j, const std::string& prefix, ModelConfig c) {
  Reader r(j, prefix);
  r.Get("embed_dim", c.embed_dim);
  r.Get("hidden_dim", c.hidden_dim);
  r.Get("vocab_size", c.vocab_size);
  r.Get("max_input_chars", c.max_input_chars);
  r.Get("max_target_chars", c.max_target_chars);
  r.Get("batch_size", c.batch_size);
  r.GetEnum("extractor_head", c.extractor_head, ParseExtractorHead);
  r.GetEnum("encoder_kind", c.encoder_kind, ParseEncoderKind);
  r.Get("use_extractor", c.use_extractor);
  r.Get("use_positions", c.use_positions);
  r.Get("num_aspects", c.num_aspects);
  r.Get("seed", c.seed);
  r.Get("init_scale", c.init_scale);
  r.RejectUnknown();
  Validated(prefix, [&] { c.Validate(); });
  return c;
}

TrainConfig TrainConfigFromJson(const json& j, const std::string& prefix, TrainConfig c) {
  Reader r(j, prefix);
  r.Get("epochs", c.epochs);
  r.Get("learning_rate", c.learning_rate);
  r.Get("batch_size", c.batch_size);
  r.Get("clip_norm", c.clip_norm);
  r.Get("eval_every", c.eval_every);
  r.Get("seed", c.seed);
  r.Get("ext_weight", c.ext_weight);
  r.Get("max_steps", c.max_steps);
  r.Get("null_aspect_baseline", c.null_aspect_baseline);
  r.Get("null_aspect_drop", c.null_aspect_drop);
  r.RejectUnknown();
  Validated(prefix, [&] { c.Validate(); });
  return c;
}

DecodeConfig DecodeConfigFromJson(const json& j, const std::string& prefix, DecodeConfig c) {
  Reader r(j, prefix);
  r.Get("beam_size", c.beam_size);
  r.Get("max_decode_len", c.max_decode_len);
  r.Get("length_penalty", c.length_penalty);
  r.RejectUnknown();
  Validated(prefix, [&] { c.Validate(); });
  return c;
}

}  // namespace extsum
