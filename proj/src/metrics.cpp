#include "extsum/metrics.hpp"

#include <iomanip>
#include <sstream>

#include "extsum/labeling.hpp"
#include "extsum/text.hpp"

namespace extsum {

double DistinctNChars(const std::vector<std::string>& texts, int n) {
  std::vector<std::u32string> seqs;
  seqs.reserve(texts.size());
  for (const auto& t : texts) seqs.push_back(DecodeUtf8(t));
  std::vector<std::vector<char32_t>> as_vectors;
  for (const auto& s : seqs) as_vectors.emplace_back(s.begin(), s.end());
  return DistinctN(as_vectors, n);
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

namespace {

double F1(double overlap, double cand_total, double ref_total) {
  if (overlap <= 0.0 || cand_total <= 0.0 || ref_total <= 0.0) return 0.0;
  // Equal to 2PR / (P + R) with a single rounding.
  return 2.0 * overlap / (cand_total + ref_total);
}

std::map<std::u32string, int> NGramCounts(const std::u32string& s, std::size_t n) {
  std::map<std::u32string, int> counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[s.substr(i, n)];
  return counts;
}

}  // namespace

double RougeN(std::string_view candidate, std::string_view reference, int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const auto width = static_cast<std::size_t>(n);
  const auto c = NGramCounts(DecodeUtf8(candidate), width);
  const auto r = NGramCounts(DecodeUtf8(reference), width);
  double overlap = 0.0, c_total = 0.0, r_total = 0.0;
  for (const auto& [gram, count] : c) {
    c_total += count;
    auto it = r.find(gram);
    if (it != r.end()) overlap += std::min(count, it->second);
  }
  for (const auto& [gram, count] : r) r_total += count;
  return F1(overlap, c_total, r_total);
}

double RougeL(std::string_view candidate, std::string_view reference) {
  const auto c = DecodeUtf8(candidate);
  const auto r = DecodeUtf8(reference);
  return F1(static_cast<double>(LcsLength(c, r)), static_cast<double>(c.size()),
            static_cast<double>(r.size()));
}

nlohmann::json EvalReport::ToJson() const {
  auto scores = [](const RougeScores& s) {
    return nlohmann::json{{"rouge1", s.rouge1}, {"rouge2", s.rouge2}, {"rougeL", s.rougeL},
                          {"n_instances", s.n_instances}};
  };
  nlohmann::json j;
  j["overall"] = {{"rouge1", overall.rouge1}, {"rouge2", overall.rouge2},
                  {"rougeL", overall.rougeL}, {"dist2", dist2},
                  {"dist3", dist3},           {"dist4", dist4}};
  j["per_aspect"] = nlohmann::json::object();
  for (const auto& [aspect, s] : per_aspect) j["per_aspect"][aspect] = scores(s);
  j["n_instances"] = n_instances;
  return j;
}

namespace {

std::string KeyName(const std::string& product, const std::string& aspect) {
  return aspect.empty() ? product : product + "/" + aspect;
}

void ThrowUnmatched(const std::vector<std::string>& problems) {
  if (problems.empty()) return;
  std::ostringstream msg;
  msg << "generations and references do not join 1:1:";
  const std::size_t shown = std::min<std::size_t>(problems.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) msg << "\n  " << problems[i];
  if (shown < problems.size()) msg << "\n  ... " << problems.size() - shown << " more";
  throw EvaluationError(msg.str());
}

void Accumulate(RougeScores& s, const std::string& cand, const std::string& ref) {
  s.rouge1 += RougeN(cand, ref, 1);
  s.rouge2 += RougeN(cand, ref, 2);
  s.rougeL += RougeL(cand, ref);
  ++s.n_instances;
}

void Average(RougeScores& s) {
  if (s.n_instances == 0) return;
  s.rouge1 /= s.n_instances;
  s.rouge2 /= s.n_instances;
  s.rougeL /= s.n_instances;
}

}  // namespace

EvalReport Evaluate(const std::vector<GenerationRecord>& generations,
                    const std::vector<Instance>& references, EvalMode mode) {
  EvalReport report;
  std::vector<std::string> problems;
  std::vector<std::string> pooled;

  if (mode == EvalMode::kTop1) {
    std::map<std::pair<std::string, std::string>, const GenerationRecord*> by_key;
    for (const auto& g : generations) {
      if (!by_key.emplace(std::pair{g.product_id, g.aspect}, &g).second) {
        problems.push_back("duplicate generation " + KeyName(g.product_id, g.aspect));
      }
    }
    std::set<std::pair<std::string, std::string>> used;
    for (const auto& ref : references) {
      const std::pair key{ref.product_id, ref.aspect.name};
      auto it = by_key.find(key);
      if (it == by_key.end()) {
        problems.push_back("no generation for " + KeyName(ref.product_id, ref.aspect.name));
        continue;
      }
      if (!used.insert(key).second) {
        problems.push_back("duplicate reference " + KeyName(ref.product_id, ref.aspect.name));
        continue;
      }
      const std::string& cand = it->second->chosen.text;
      Accumulate(report.overall, cand, ref.summary);
      Accumulate(report.per_aspect[ref.aspect.name], cand, ref.summary);
      pooled.push_back(cand);
    }
    for (const auto& [key, g] : by_key) {
      if (!used.count(key)) problems.push_back("no reference for " + KeyName(key.first, key.second));
    }
  } else {
    std::map<std::string, const GenerationRecord*> by_product;
    for (const auto& g : generations) {
      if (!by_product.emplace(g.product_id, &g).second) {
        problems.push_back("duplicate generation " + g.product_id);
      }
    }
    std::map<std::string, std::size_t> rank;
    for (const auto& ref : references) {
      auto it = by_product.find(ref.product_id);
      if (it == by_product.end()) {
        problems.push_back("no generation for " + ref.product_id);
        continue;
      }
      const auto& cands = it->second->candidates;
      if (cands.empty()) {
        problems.push_back("no candidates for " + ref.product_id);
        continue;
      }
      const std::size_t j = std::min(rank[ref.product_id]++, cands.size() - 1);
      Accumulate(report.overall, cands[j].text, ref.summary);
      Accumulate(report.per_aspect[ref.aspect.name], cands[j].text, ref.summary);
    }
    for (const auto& [product, g] : by_product) {
      if (!rank.count(product)) {
        problems.push_back("no reference for " + product);
        continue;
      }
      for (const auto& c : g->candidates) pooled.push_back(c.text);
    }
  }
  ThrowUnmatched(problems);

  Average(report.overall);
  for (auto& [aspect, s] : report.per_aspect) Average(s);
  report.n_instances = report.overall.n_instances;
  report.dist2 = DistinctNChars(pooled, 2);
  report.dist3 = DistinctNChars(pooled, 3);
  report.dist4 = DistinctNChars(pooled, 4);
  return report;
}

namespace {

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string HeatmapExport::ToCsv() const {
  std::ostringstream out;
  out << "sentence,score\n" << std::setprecision(17);
  for (const auto& [sentence, score] : rows) out << CsvField(sentence) << ',' << score << '\n';
  return out.str();
}

HeatmapExport ExportHeatmap(const ExtModel& model, const Instance& instance, int aspect) {
  if (!model.config().use_extractor) {
    throw std::invalid_argument("heat maps need a model with the extractor enabled");
  }
  const SourceInput source = PrepareSource(instance.sentences, model.vocab());
  const auto fused = model.EmbedFused(source.token_ids, aspect);
  const auto encoded = model.Encode(fused, source.boundaries);
  const Vec scores = model.ExtractorScore(encoded.sentence_reps, aspect);
  HeatmapExport out;
  out.product_id = instance.product_id;
  out.aspect = aspect == model.null_aspect()
                   ? std::string()
                   : model.aspect_names().at(static_cast<std::size_t>(aspect));
  for (std::size_t i = 0; i < instance.sentences.size(); ++i) {
    out.rows.emplace_back(instance.sentences[i], scores[static_cast<Eigen::Index>(i)]);
  }
  return out;
}

}  // namespace extsum
