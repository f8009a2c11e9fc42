#ifndef EXTSUM_CLI_HPP
#define EXTSUM_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "extsum/corpus.hpp"
#include "extsum/decoder.hpp"
#include "extsum/labeling.hpp"
#include "extsum/metrics.hpp"
#include "extsum/model.hpp"
#include "extsum/trainer.hpp"

namespace extsum {

enum class GenerateMode {
  kAspect,   // beam search per instance with its aspect
  kNullTop1, // beam search per instance with the null aspect
  kTopK,     // one record per product, K = its instance count
};

struct RunConfig {
  std::uint64_t seed = 1;

  struct Paths {
    std::filesystem::path data_dir = "data";
    std::filesystem::path products;  // raw product JSONL for build-corpus
    std::filesystem::path input;     // label: input JSONL (default: every split in data_dir)
    std::filesystem::path output;    // label: output JSONL
    std::filesystem::path checkpoint = "model.ckpt";
    std::filesystem::path report = "train_report.json";
    std::filesystem::path generations = "generations.jsonl";
    std::filesystem::path eval_report = "eval_report.json";
    std::filesystem::path heatmap = "heatmap.csv";

    std::filesystem::path SplitFile(Split split) const;
  } paths;

  CategorySchema schema;
  ModelConfig model;
  TrainConfig train;
  DecodeConfig decode;
  LabelOptions label;
  BuildOptions corpus;
  int synth_products = 200;
  GenerateMode generate_mode = GenerateMode::kAspect;
  Split generate_split = Split::kTest;
  EvalMode evaluate_mode = EvalMode::kTop1;
  std::string heatmap_product;  // empty: first instance of the split
  std::string heatmap_aspect;   // empty: the instance's aspect
};

// The complete default configuration as JSON.
nlohmann::json DefaultConfigJson();

// Applies "dotted.key=value"; the value is parsed as JSON, falling back to a
// plain string. Throws ConfigError for a malformed assignment.
void ApplyOverride(nlohmann::json& config, const std::string& assignment);

// Merges `overlay` into `base` recursively (objects merge, other values replace).
void MergeConfig(nlohmann::json& base, const nlohmann::json& overlay);

// Throws ConfigError naming the offending key.
RunConfig ParseRunConfig(const nlohmann::json& config);

// Entry point of the extsumm executable; returns the process exit code.
int RunCli(int argc, char** argv);
int RunCli(const std::vector<std::string>& args);

}  // namespace extsum

#endif  // EXTSUM_CLI_HPP
