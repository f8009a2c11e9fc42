#include "extsum/labeling.hpp"

#include <algorithm>
#include <stdexcept>

#include "extsum/text.hpp"

namespace extsum {

std::size_t LcsLength(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (char32_t ca : a) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = ca == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t LcsLength(std::string_view a, std::string_view b) {
  return LcsLength(std::u32string_view(DecodeUtf8(a)),
                   std::u32string_view(DecodeUtf8(b)));
}

double OverlapRate(std::string_view sentence, std::string_view summary,
                   bool strip_punctuation) {
  std::u32string s = DecodeUtf8(sentence);
  std::u32string y = DecodeUtf8(summary);
  if (strip_punctuation) {
    s = StripPunctuation(s);
    y = StripPunctuation(y);
  }
  if (s.empty()) {
    throw std::invalid_argument("overlap rate of an empty sentence is undefined");
  }
  return static_cast<double>(LcsLength(s, y)) / static_cast<double>(s.size());
}

SentenceLabelSet LabelSentences(const std::vector<std::string>& sentences,
                                std::string_view summary,
                                const LabelOptions& options) {
  SentenceLabelSet out;
  out.threshold = options.threshold;
  out.overlap_rates.reserve(sentences.size());
  out.labels.reserve(sentences.size());
  for (const auto& s : sentences) {
    const double r = OverlapRate(s, summary, options.strip_punctuation);
    out.overlap_rates.push_back(r);
    out.labels.push_back(r >= options.threshold ? 1 : 0);
  }
  return out;
}

}  // namespace extsum
