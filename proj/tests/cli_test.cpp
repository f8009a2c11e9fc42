#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "extsum/cli.hpp"
#include "extsum/json_io.hpp"
#include "test_util.hpp"

namespace extsum {
namespace {

using nlohmann::json;
using testing::TempDir;

struct RunResult {
  int code;
  std::string output;
};

RunResult RunBinary(const std::filesystem::path& cwd, const std::string& args) {
  const std::string cmd =
      "cd '" + cwd.string() + "' && '" + std::string(EXTSUMM_BIN) + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Overrides, DottedKeysAndValueParsing) {
  json c = DefaultConfigJson();
  ApplyOverride(c, "train.epochs=3");
  ApplyOverride(c, "model.encoder_kind=transformer");
  ApplyOverride(c, "schema.aspects=[\"x\",\"y\"]");
  ApplyOverride(c, "paths.checkpoint=out/m.ckpt");
  EXPECT_EQ(c["train"]["epochs"], 3);
  EXPECT_EQ(c["model"]["encoder_kind"], "transformer");
  const RunConfig rc = ParseRunConfig(c);
  EXPECT_EQ(rc.train.epochs, 3);
  EXPECT_EQ(rc.model.encoder_kind, EncoderKind::kTransformer);
  EXPECT_EQ(rc.schema.aspects.size(), 2u);
  EXPECT_EQ(rc.model.num_aspects, 2);
  EXPECT_EQ(rc.paths.checkpoint, "out/m.ckpt");
  EXPECT_THROW(ApplyOverride(c, "novalue"), ConfigError);
  EXPECT_THROW(ApplyOverride(c, "a..b=1"), ConfigError);
}

TEST(Overrides, TopLevelSeedFlowsIntoModelAndTrainer) {
  json c = DefaultConfigJson();
  c["seed"] = 99;
  const RunConfig rc = ParseRunConfig(c);
  EXPECT_EQ(rc.model.seed, 99u);
  EXPECT_EQ(rc.train.seed, 99u);
  ApplyOverride(c, "train.seed=5");
  EXPECT_EQ(ParseRunConfig(c).train.seed, 5u);
}

std::string KeyOf(const std::string& assignment) {
  json c = DefaultConfigJson();
  ApplyOverride(c, assignment);
  try {
    ParseRunConfig(c);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

TEST(ParseRunConfig, ErrorsNameTheOffendingKey) {
  EXPECT_EQ(KeyOf("train.epochs=0"), "train.epochs");
  EXPECT_EQ(KeyOf("train.epochs=\"many\""), "train.epochs");
  EXPECT_EQ(KeyOf("model.hidden_dim=7"), "model.hidden_dim");
  EXPECT_EQ(KeyOf("model.encoder_kind=lstm"), "model.encoder_kind");
  EXPECT_EQ(KeyOf("model.colour=1"), "model.colour");
  EXPECT_EQ(KeyOf("decode.beam_size=0"), "decode.beam_size");
  EXPECT_EQ(KeyOf("generate.mode=sample"), "generate.mode");
  EXPECT_EQ(KeyOf("corpus.split_ratios=[0.5,0.5]"), "corpus.split_ratios");
  EXPECT_EQ(KeyOf("schema.aspects=[]"), "schema.cluster_count");
  EXPECT_EQ(KeyOf("bogus=1"), "bogus");
  EXPECT_EQ(KeyOf("seed=-1"), "seed");
  EXPECT_EQ(KeyOf("train.seed=-1"), "train.seed");
  EXPECT_EQ(KeyOf("train.epochs=2"), "");
}

TEST(Cli, InvalidConfigExitsNonZeroNamingKey) {
  TempDir dir("cli");
  const auto r = RunBinary(dir.path(), "train --set train.learning_rate=-1");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("train.learning_rate"), std::string::npos) << r.output;
  EXPECT_FALSE(std::filesystem::exists(dir / "model.ckpt"));

  std::ofstream(dir / "bad.json") << "{\"synth\": {\"products\": -3}}";
  const auto r2 = RunBinary(dir.path(), "synth --config bad.json");
  EXPECT_EQ(r2.code, 2);
  EXPECT_NE(r2.output.find("synth.products"), std::string::npos) << r2.output;
  EXPECT_FALSE(std::filesystem::exists(dir / "data"));

  EXPECT_NE(RunBinary(dir.path(), "").code, 0);
  EXPECT_NE(RunBinary(dir.path(), "frobnicate").code, 0);
}

TEST(Cli, EndToEndPipeline) {
  TempDir dir("cli");
  std::ofstream(dir / "run.json") << R"({
    "synth": {"products": 40},
    "model": {"embed_dim": 16, "hidden_dim": 16},
    "train": {"epochs": 2, "eval_every": 5},
    "generate": {"split": "dev"}
  })";
  const std::string cfg = "--config run.json --seed 4";
  auto r = RunBinary(dir.path(), "synth " + cfg);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("#sum"), std::string::npos);
  ASSERT_EQ(RunBinary(dir.path(), "label " + cfg).code, 0);
  EXPECT_NE(Slurp(dir / "data" / "train.jsonl").find("\"labels\""), std::string::npos);

  r = RunBinary(dir.path(), "train " + cfg);
  ASSERT_EQ(r.code, 0) << r.output;
  const auto report = json::parse(Slurp(dir / "train_report.json"));
  EXPECT_FALSE(report["steps"].empty());
  EXPECT_FALSE(report["dev_history"].empty());
  EXPECT_EQ(Slurp(dir / "model.ckpt").rfind("EXTSUMM-CKPT-v1\n", 0), 0u);

  ASSERT_EQ(RunBinary(dir.path(), "generate " + cfg).code, 0);
  const std::string first = Slurp(dir / "generations.jsonl");
  ASSERT_EQ(RunBinary(dir.path(), "generate " + cfg).code, 0);
  EXPECT_EQ(Slurp(dir / "generations.jsonl"), first);

  r = RunBinary(dir.path(), "evaluate " + cfg);
  ASSERT_EQ(r.code, 0) << r.output;
  const auto eval = json::parse(Slurp(dir / "eval_report.json"));
  EXPECT_GT(eval["n_instances"].get<int>(), 0);
  EXPECT_TRUE(eval["overall"].contains("dist2"));

  ASSERT_EQ(RunBinary(dir.path(), "generate " + cfg + " --set generate.mode=topk").code, 0);
  r = RunBinary(dir.path(), "evaluate " + cfg + " --set evaluate.mode=topk");
  ASSERT_EQ(r.code, 0) << r.output;

  r = RunBinary(dir.path(), "heatmap " + cfg);
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string csv = Slurp(dir / "heatmap.csv");
  EXPECT_EQ(csv.rfind("sentence,score\n", 0), 0u);
}

TEST(Cli, EvaluatePerfectGenerationsScoresOne) {
  TempDir dir("cli");
  ASSERT_EQ(RunBinary(dir.path(), "synth --set synth.products=30").code, 0);
  std::ifstream in(dir / "data" / "test.jsonl");
  std::ofstream out(dir / "generations.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    const auto j = json::parse(line);
    out << json{{"product_id", j["product_id"]},
                {"aspect", j["aspect"]},
                {"summary", j["summary"]},
                {"candidates", json::array()}}
               .dump()
        << "\n";
  }
  out.close();
  const auto r = RunBinary(dir.path(), "evaluate");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto eval = json::parse(Slurp(dir / "eval_report.json"));
  EXPECT_DOUBLE_EQ(eval["overall"]["rouge1"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(eval["overall"]["rouge2"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(eval["overall"]["rougeL"].get<double>(), 1.0);
}

TEST(Cli, BuildCorpusFromRawProducts) {
  TempDir dir("cli");
  {
    std::ofstream out(dir / "raw.jsonl");
    for (int i = 0; i < 12; ++i) {
      const std::string look = i % 2 ? "a slim metal frame with a glossy back"
                                     : "the body is thin and light in hand";
      const std::string power = i % 2 ? "battery lasts two days with heavy use"
                                      : "the battery charges fast and lasts long";
      out << json{{"product_id", "prod-" + std::to_string(i)},
                  {"category", "phone"},
                  {"title", "Phone " + std::to_string(i)},
                  {"details", {"detail one", "detail two"}},
                  {"raw_summary", look + ". " + power + "."}}
                 .dump()
          << "\n";
    }
  }
  const auto r = RunBinary(dir.path(),
                     "build-corpus --set paths.products=raw.jsonl --set schema.category=phone "
                     "--set 'schema.aspects=[\"look\",\"power\"]'");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("phone"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "data" / "train.jsonl"));

  const auto missing = RunBinary(dir.path(), "build-corpus");
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.output.find("paths.products"), std::string::npos);
}

}  // namespace
}  // namespace extsum
