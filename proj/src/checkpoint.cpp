#include <fstream>
#include <sstream>
#include <stdexcept>

#include "extsum/json_io.hpp"
#include "extsum/model.hpp"
#include "extsum/text.hpp"

namespace extsum {

using nlohmann::json;

void SaveCheckpoint(const ExtModel& model, const std::filesystem::path& path) {
  json params = json::array();
  for (const auto& p : model.params().all()) {
    std::vector<double> data(p->value.data(), p->value.data() + p->value.size());
    params.push_back({{"name", p->name},
                      {"rows", p->value.rows()},
                      {"cols", p->value.cols()},
                      {"data", std::move(data)}});
  }
  json body = {{"config", ToJson(model.config())},
               {"vocab", model.vocab().tokens()},
               {"separator", EncodeUtf8(model.vocab().separator())},
               {"aspects", model.aspect_names()},
               {"params", std::move(params)}};
  WriteFileAtomic(path, std::string(kCheckpointMagic) + "\n" + body.dump() + "\n");
}

ExtModel LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != kCheckpointMagic) {
    throw std::runtime_error(path.string() + " is not an EXTSUMM-CKPT-v1 checkpoint");
  }
  std::stringstream rest;
  rest << in.rdbuf();
  json body;
  try {
    body = json::parse(rest.str());
  } catch (const json::exception& e) {
    throw std::runtime_error("corrupt checkpoint " + path.string() + ": " + e.what());
  }

  try {
    const ModelConfig config = ModelConfigFromJson(body.at("config"), "config");
    const auto sep = DecodeUtf8(body.at("separator").get<std::string>());
    if (sep.size() != 1) throw std::runtime_error("checkpoint separator is not one character");
    Vocabulary vocab =
        Vocabulary::FromTokens(body.at("vocab").get<std::vector<std::string>>(), sep[0]);
    ExtModel model(config, std::move(vocab),
                   body.at("aspects").get<std::vector<std::string>>());

    const auto& stored = body.at("params");
    if (stored.size() != model.params().all().size()) {
      throw std::runtime_error("checkpoint has " + std::to_string(stored.size()) +
                               " tensors, model expects " +
                               std::to_string(model.params().all().size()));
    }
    for (const auto& entry : stored) {
      const auto name = entry.at("name").get<std::string>();
      if (!model.params().Contains(name)) {
        throw std::runtime_error("unexpected tensor '" + name + "'");
      }
      Param& p = model.params().Get(name);
      const auto rows = entry.at("rows").get<Eigen::Index>();
      const auto cols = entry.at("cols").get<Eigen::Index>();
      const auto data = entry.at("data").get<std::vector<double>>();
      if (rows != p.value.rows() || cols != p.value.cols() ||
          static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw std::runtime_error("shape mismatch for tensor '" + name + "'");
      }
      p.value = Eigen::Map<const Mat>(data.data(), rows, cols);
    }
    return model;
  } catch (const json::exception& e) {
    throw std::runtime_error("corrupt checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace extsum
