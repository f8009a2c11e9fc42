#ifndef EXTSUM_JSON_IO_HPP
#define EXTSUM_JSON_IO_HPP

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "extsum/decoder.hpp"
#include "extsum/model.hpp"
#include "extsum/trainer.hpp"

namespace extsum {

// A bad configuration value; key() is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

nlohmann::json ToJson(const ModelConfig& c);
nlohmann::json ToJson(const TrainConfig& c);
nlohmann::json ToJson(const DecodeConfig& c);
nlohmann::json ToJson(const TrainReport& r);

// Keys absent from `j` keep the defaults in `base`. Unknown keys and wrong
// types raise ConfigError naming `prefix.key`.
ModelConfig ModelConfigFromJson(const nlohmann::json& j, const std::string& prefix,
                                ModelConfig base = {});
TrainConfig TrainConfigFromJson(const nlohmann::json& j, const std::string& prefix,
                                TrainConfig base = {});
DecodeConfig DecodeConfigFromJson(const nlohmann::json& j, const std::string& prefix,
                                  DecodeConfig base = {});

}  // namespace extsum

#endif  // EXTSUM_JSON_IO_HPP
