#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "extsum/labeling.hpp"

namespace extsum {
namespace {

// Longest common subsequence by enumerating every subsequence of the
// shorter string (bitmask) and testing it against the longer one.
std::size_t BruteForceLcs(const std::string& a, const std::string& b) {
  const std::string& s = a.size() <= b.size() ? a : b;
  const std::string& t = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (unsigned mask = 0; mask < (1u << s.size()); ++mask) {
    std::string sub;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(s[i]);
    }
    if (sub.size() <= best) continue;
    std::size_t j = 0;
    for (char c : t) {
      if (j < sub.size() && sub[j] == c) ++j;
    }
    if (j == sub.size()) best = sub.size();
  }
  return best;
}

TEST(Lcs, KnownValues) {
  EXPECT_EQ(LcsLength("abcd", "acbd"), 3u);
  EXPECT_EQ(LcsLength("", "abc"), 0u);
  EXPECT_EQ(LcsLength("abc", "abc"), 3u);
  EXPECT_EQ(LcsLength("abc", "xyz"), 0u);
  EXPECT_EQ(LcsLength("AGGTAB", "GXTXAYB"), 4u);
}

TEST(Lcs, MatchesBruteForceOnRandomStrings) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> len(0, 10), letter(0, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string a, b;
    for (int i = len(rng); i > 0; --i) a.push_back(static_cast<char>('a' + letter(rng)));
    for (int i = len(rng); i > 0; --i) b.push_back(static_cast<char>('a' + letter(rng)));
    ASSERT_EQ(LcsLength(a, b), BruteForceLcs(a, b)) << a << " / " << b;
  }
}

TEST(Lcs, CountsCodePointsNotBytes) {
  // "手机" vs "手表": one shared character of three bytes.
  EXPECT_EQ(LcsLength("\xE6\x89\x8B\xE6\x9C\xBA", "\xE6\x89\x8B\xE8\xA1\xA8"), 1u);
}

TEST(OverlapRate, IsLcsOverSentenceLength) {
  EXPECT_DOUBLE_EQ(OverlapRate("abcd", "xaybzz"), 0.5);
  EXPECT_DOUBLE_EQ(OverlapRate("abc", "abc"), 1.0);
  EXPECT_DOUBLE_EQ(OverlapRate("abc", ""), 0.0);
  EXPECT_THROW(OverlapRate("", "abc"), std::invalid_argument);
}

TEST(OverlapRate, StripPunctuationOption) {
  EXPECT_DOUBLE_EQ(OverlapRate("a,b", "ab"), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(OverlapRate("a,b", "ab", true), 1.0);
}

TEST(LabelSentences, ThresholdIsInclusive) {
  // 7/20 = 0.35 exactly on the boundary.
  const std::string sentence = "abcdefgQQQQQQQQQQQQQ";
  const auto set = LabelSentences({sentence, "zzzz"}, "abcdefg");
  ASSERT_EQ(set.labels.size(), 2u);
  EXPECT_DOUBLE_EQ(set.overlap_rates[0], 0.35);
  EXPECT_EQ(set.labels[0], 1);
  EXPECT_EQ(set.labels[1], 0);
  EXPECT_DOUBLE_EQ(set.threshold, 0.35);
}

TEST(LabelSentences, CustomThreshold) {
  LabelOptions opts;
  opts.threshold = 0.9;
  const auto set = LabelSentences({"abcx", "abcd"}, "abcd", opts);
  EXPECT_EQ(set.labels, (std::vector<int>{0, 1}));
}

}  // namespace
}  // namespace extsum
