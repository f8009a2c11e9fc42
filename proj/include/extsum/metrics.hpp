#ifndef EXTSUM_METRICS_HPP
#define EXTSUM_METRICS_HPP

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "extsum/corpus.hpp"
#include "extsum/decoder.hpp"
#include "extsum/model.hpp"

namespace extsum {

// Distinct n-grams over all sequences divided by the total n-gram count;
// 0 when there are no n-grams. Throws std::invalid_argument for n < 1.
template <typename Token>
double DistinctN(const std::vector<std::vector<Token>>& sequences, int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  std::set<std::vector<Token>> seen;
  std::size_t total = 0;
  const auto width = static_cast<std::size_t>(n);
  for (const auto& seq : sequences) {
    for (std::size_t i = 0; i + width <= seq.size(); ++i) {
      seen.emplace(seq.begin() + static_cast<std::ptrdiff_t>(i),
                   seq.begin() + static_cast<std::ptrdiff_t>(i + width));
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(seen.size()) / static_cast<double>(total);
}

// Character-level Dist-n over UTF-8 texts.
double DistinctNChars(const std::vector<std::string>& texts, int n);
// Whitespace-separated tokens.
std::vector<std::string> SplitWords(std::string_view text);

// Clipped character n-gram F1.
double RougeN(std::string_view candidate, std::string_view reference, int n);
// LCS-based character F1.
double RougeL(std::string_view candidate, std::string_view reference);

struct RougeScores {
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  int n_instances = 0;
};

struct EvalReport {
  RougeScores overall;
  double dist2 = 0.0;
  double dist3 = 0.0;
  double dist4 = 0.0;
  std::map<std::string, RougeScores> per_aspect;
  int n_instances = 0;

  nlohmann::json ToJson() const;
};

enum class EvalMode {
  // One record per (product_id, aspect); Dist-n over the chosen summaries.
  kTop1,
  // One record per product; Dist-n pools every candidate. The product's
  // references, in input order, are scored against candidates 0, 1, ...
  // (the last candidate is reused when there are fewer candidates).
  kTopK,
};

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-instance ROUGE averaged arithmetically. Throws EvaluationError listing
// the keys of unmatched or duplicated records.
EvalReport Evaluate(const std::vector<GenerationRecord>& generations,
                    const std::vector<Instance>& references, EvalMode mode = EvalMode::kTop1);

struct HeatmapExport {
  std::string product_id;
  std::string aspect;
  std::vector<std::pair<std::string, double>> rows;

  // "sentence,score" header, one row per sentence.
  std::string ToCsv() const;
};

// Raw sigmoid extractor scores of each input sentence for `aspect`.
HeatmapExport ExportHeatmap(const ExtModel& model, const Instance& instance, int aspect);

}  // namespace extsum

#endif  // EXTSUM_METRICS_HPP
