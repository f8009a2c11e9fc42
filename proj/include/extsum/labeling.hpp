#ifndef EXTSUM_LABELING_HPP
#define EXTSUM_LABELING_HPP

#include <string>
#include <string_view>
#include <vector>

namespace extsum {

inline constexpr double kDefaultLabelThreshold = 0.35;

struct SentenceLabelSet {
  std::vector<double> overlap_rates;
  std::vector<int> labels;
  double threshold = kDefaultLabelThreshold;
};

struct LabelOptions {
  double threshold = kDefaultLabelThreshold;
  // Drop whitespace and ASCII punctuation from both sides before LCS.
  bool strip_punctuation = false;
};

// Character-level longest common subsequence, O(|a|*|b|) time, O(min) space.
std::size_t LcsLength(std::u32string_view a, std::u32string_view b);
std::size_t LcsLength(std::string_view a, std::string_view b);

// LCS(sentence, summary) / |sentence|. Throws std::invalid_argument on an
// empty sentence.
double OverlapRate(std::string_view sentence, std::string_view summary,
                   bool strip_punctuation = false);

// labels[i] = overlap_rates[i] >= threshold.
SentenceLabelSet LabelSentences(const std::vector<std::string>& sentences,
                                std::string_view summary,
                                const LabelOptions& options = {});

}  // namespace extsum

#endif  // EXTSUM_LABELING_HPP
