#include <gtest/gtest.h>

#include <random>
#include <set>

#include "extsum/metrics.hpp"
#include "test_util.hpp"

namespace extsum {
namespace {

using testing::MakeInstance;
using testing::TinyModel;

TEST(Distinct, HandComputedValues) {
  EXPECT_DOUBLE_EQ(DistinctN(std::vector<std::vector<std::string>>{SplitWords("a b a b")}, 2),
                   2.0 / 3.0);
  EXPECT_DOUBLE_EQ(DistinctN(std::vector<std::vector<std::string>>{SplitWords("a a a")}, 2), 0.5);
  EXPECT_DOUBLE_EQ(DistinctN(std::vector<std::vector<std::string>>{SplitWords("a b c d")}, 2),
                   1.0);
  EXPECT_EQ(DistinctN(std::vector<std::vector<std::string>>{{"a"}}, 2), 0.0);
  EXPECT_THROW(DistinctN(std::vector<std::vector<int>>{}, 0), std::invalid_argument);
}

TEST(Distinct, MatchesCountingOracle) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> len(0, 8), tok(0, 2);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::vector<int>> seqs(1 + trial % 4);
    for (auto& s : seqs) {
      for (int i = len(rng); i > 0; --i) s.push_back(tok(rng));
    }
    for (int n = 1; n <= 4; ++n) {
      std::vector<std::vector<int>> grams;
      for (const auto& s : seqs) {
        for (int i = 0; i + n <= static_cast<int>(s.size()); ++i) {
          grams.emplace_back(s.begin() + i, s.begin() + i + n);
        }
      }
      std::vector<std::vector<int>> unique;
      for (const auto& g : grams) {
        if (std::find(unique.begin(), unique.end(), g) == unique.end()) unique.push_back(g);
      }
      const double expected =
          grams.empty() ? 0.0 : static_cast<double>(unique.size()) / grams.size();
      EXPECT_DOUBLE_EQ(DistinctN(seqs, n), expected);
    }
  }
}

TEST(Distinct, DuplicateNeverIncreases) {
  const std::vector<std::string> texts = {"abcab", "xyzxy"};
  auto more = texts;
  more.push_back("abcab");
  EXPECT_LE(DistinctNChars(more, 2), DistinctNChars(texts, 2));
}

TEST(Rouge, HandComputedValues) {
  EXPECT_DOUBLE_EQ(RougeN("abc", "abd", 1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(RougeN("abc", "abd", 2), 0.5);
  EXPECT_DOUBLE_EQ(RougeL("abcd", "acbd"), 0.75);
  EXPECT_DOUBLE_EQ(RougeN("xyz", "xyz", 2), 1.0);
  EXPECT_DOUBLE_EQ(RougeL("xyz", "xyz"), 1.0);
  EXPECT_EQ(RougeN("abc", "xyz", 1), 0.0);
  EXPECT_EQ(RougeL("", "abc"), 0.0);
  EXPECT_EQ(RougeN("a", "a", 2), 0.0);
  EXPECT_THROW(RougeN("a", "a", 0), std::invalid_argument);
}

TEST(Rouge, ClippedCounts) {
  // cand "aaa" vs ref "ab": overlap min(3, 1) = 1, P = 1/3, R = 1/2.
  EXPECT_DOUBLE_EQ(RougeN("aaa", "ab", 1), 2 * (1.0 / 3) * 0.5 / (1.0 / 3 + 0.5));
}

TEST(Rouge, SymmetricUnderSwap) {
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> len(1, 12), ch(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::string a, b;
    for (int i = len(rng); i > 0; --i) a.push_back(static_cast<char>('a' + ch(rng)));
    for (int i = len(rng); i > 0; --i) b.push_back(static_cast<char>('a' + ch(rng)));
    EXPECT_DOUBLE_EQ(RougeN(a, b, 1), RougeN(b, a, 1));
    EXPECT_DOUBLE_EQ(RougeN(a, b, 2), RougeN(b, a, 2));
    EXPECT_DOUBLE_EQ(RougeL(a, b), RougeL(b, a));
    EXPECT_GE(RougeL(a, b), 0.0);
    EXPECT_LE(RougeL(a, b), 1.0);
  }
}

TEST(Rouge, MultibyteCharacters) {
  EXPECT_DOUBLE_EQ(RougeN("\xE6\x89\x8B\xE6\x9C\xBA", "\xE6\x89\x8B\xE8\xA1\xA8", 1), 0.5);
}

GenerationRecord Record(std::string product, std::string aspect, std::string text) {
  GenerationRecord r;
  r.product_id = std::move(product);
  r.aspect = std::move(aspect);
  r.chosen.text = std::move(text);
  r.candidates = {r.chosen};
  return r;
}

TEST(Evaluate, PerfectGenerationsScoreOne) {
  const std::vector<Instance> refs = {MakeInstance("p1", {"s"}, "look", 0, "thin body"),
                                      MakeInstance("p1", {"s"}, "power", 1, "big battery")};
  const std::vector<GenerationRecord> gens = {Record("p1", "power", "big battery"),
                                              Record("p1", "look", "thin body")};
  const auto report = Evaluate(gens, refs);
  EXPECT_EQ(report.n_instances, 2);
  EXPECT_DOUBLE_EQ(report.overall.rouge1, 1.0);
  EXPECT_DOUBLE_EQ(report.overall.rouge2, 1.0);
  EXPECT_DOUBLE_EQ(report.overall.rougeL, 1.0);
  EXPECT_EQ(report.per_aspect.size(), 2u);
  EXPECT_EQ(report.per_aspect.at("look").n_instances, 1);
}

TEST(Evaluate, OverallIsUnweightedMean) {
  const std::vector<Instance> refs = {MakeInstance("p1", {"s"}, "x", 0, "abd"),
                                      MakeInstance("p2", {"s"}, "y", 1, "acbd")};
  const std::vector<GenerationRecord> gens = {Record("p1", "x", "abc"),
                                              Record("p2", "y", "abcd")};
  const auto report = Evaluate(gens, refs);
  EXPECT_DOUBLE_EQ(report.overall.rouge1, (2.0 / 3.0 + 1.0) / 2);
  EXPECT_DOUBLE_EQ(report.overall.rougeL, (2.0 / 3.0 + 0.75) / 2);
  EXPECT_DOUBLE_EQ(report.dist2, DistinctNChars({"abc", "abcd"}, 2));
  const auto j = report.ToJson();
  for (const char* key : {"rouge1", "rouge2", "rougeL", "dist2", "dist3", "dist4"}) {
    EXPECT_TRUE(j["overall"].contains(key)) << key;
  }
  EXPECT_EQ(j["n_instances"], 2);
}

TEST(Evaluate, ListsUnmatchedKeys) {
  const std::vector<Instance> refs = {MakeInstance("p1", {"s"}, "x", 0, "abd")};
  const std::vector<GenerationRecord> gens = {Record("p9", "x", "abc")};
  try {
    Evaluate(gens, refs);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("p1/x"), std::string::npos);
    EXPECT_NE(msg.find("p9/x"), std::string::npos);
  }
}

TEST(Evaluate, TopKPoolsCandidatesPerProduct) {
  const std::vector<Instance> refs = {MakeInstance("p1", {"s"}, "x", 0, "ab"),
                                      MakeInstance("p1", {"s"}, "y", 1, "cd")};
  GenerationRecord r;
  r.product_id = "p1";
  r.candidates.resize(2);
  r.candidates[0].text = "ab";
  r.candidates[1].text = "cd";
  r.chosen = r.candidates[0];
  const auto report = Evaluate({r}, refs, EvalMode::kTopK);
  EXPECT_DOUBLE_EQ(report.overall.rouge1, 1.0);
  EXPECT_DOUBLE_EQ(report.dist2, 1.0);
  EXPECT_EQ(report.n_instances, 2);
  EXPECT_THROW(Evaluate({r}, refs, EvalMode::kTop1), EvaluationError);
}

TEST(Heatmap, OneRowPerSentence) {
  const auto m = TinyModel();
  const auto inst = MakeInstance("p1", {"abc", "d,x\"e", "fgh"}, "a1", 1, "gh");
  const auto heat = ExportHeatmap(m, inst, 1);
  ASSERT_EQ(heat.rows.size(), 3u);
  for (const auto& [s, score] : heat.rows) {
    EXPECT_GT(score, 0.0);
    EXPECT_LT(score, 1.0);
  }
  const auto csv = heat.ToCsv();
  EXPECT_EQ(csv.rfind("sentence,score\n", 0), 0u);
  EXPECT_NE(csv.find("\"d,x\"\"e\""), std::string::npos);
  const auto other = ExportHeatmap(m, inst, 0);
  EXPECT_NE(other.rows[0].second, heat.rows[0].second);
  EXPECT_THROW(ExportHeatmap(TinyModel(ExtractorHead::kBilinear, EncoderKind::kRecurrent, false),
                             inst, 0),
               std::invalid_argument);
}

}  // namespace
}  // namespace extsum
