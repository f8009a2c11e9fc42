#include "extsum/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "extsum/random.hpp"
#include "extsum/text.hpp"

namespace extsum {

using nlohmann::json;

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

// ---- Schema -------------------------------------------------------------------

CategorySchema CategorySchema::FromNames(std::string category,
                                         const std::vector<std::string>& names) {
  CategorySchema schema;
  schema.category = std::move(category);
  for (std::size_t i = 0; i < names.size(); ++i) {
    schema.aspects.push_back({names[i], static_cast<int>(i)});
  }
  schema.cluster_count = static_cast<int>(names.size());
  schema.Validate();
  return schema;
}

CategorySchema CategorySchema::Clusters(std::string category, int k) {
  std::vector<std::string> names;
  for (int i = 0; i < k; ++i) names.push_back("cluster_" + std::to_string(i));
  return FromNames(std::move(category), names);
}

void CategorySchema::Validate() const {
  if (aspects.empty()) throw ValidationError("schema has no aspects");
  if (cluster_count != static_cast<int>(aspects.size())) {
    throw ValidationError("schema cluster_count " + std::to_string(cluster_count) +
                          " != number of aspects " +
                          std::to_string(aspects.size()));
  }
  std::set<std::string> names;
  std::set<int> indices;
  for (const auto& a : aspects) {
    if (a.name.empty()) throw ValidationError("schema aspect with empty name");
    if (a.index < 0) throw ValidationError("schema aspect with negative index");
    if (!names.insert(a.name).second) {
      throw ValidationError("duplicate aspect name '" + a.name + "'");
    }
    if (!indices.insert(a.index).second) {
      throw ValidationError("duplicate aspect index " + std::to_string(a.index));
    }
  }
}

const AspectCategory& CategorySchema::Find(std::string_view name) const {
  for (const auto& a : aspects) {
    if (a.name == name) return a;
  }
  throw ValidationError("aspect '" + std::string(name) + "' not in schema '" +
                        category + "'");
}

// ---- Validation ----------------------------------------------------------------

std::size_t JoinedLength(const std::vector<std::string>& sentences) {
  std::size_t n = 0;
  for (const auto& s : sentences) n += CharLength(s) + 1;
  return n;
}

namespace {

bool ContainsChar(std::string_view s, char32_t c) {
  const auto decoded = DecodeUtf8(s);
  return decoded.find(c) != std::u32string::npos;
}

}  // namespace

void ValidateProduct(const ProductRecord& product, const CorpusLimits& limits) {
  if (product.product_id.empty()) {
    throw ValidationError("product with empty product_id");
  }
  for (const auto& s : product.detail_sentences) {
    if (ContainsChar(s, limits.separator)) {
      throw ValidationError("product " + product.product_id +
                            ": detail sentence contains the separator: " + s);
    }
  }
}

void ValidateInstance(const Instance& instance, const CorpusLimits& limits) {
  const std::string& id = instance.product_id;
  if (id.empty()) throw ValidationError("instance with empty product_id");
  if (instance.sentences.empty()) {
    throw ValidationError("instance " + id + ": no sentences");
  }
  for (const auto& s : instance.sentences) {
    if (s.empty()) throw ValidationError("instance " + id + ": empty sentence");
    if (ContainsChar(s, limits.separator)) {
      throw ValidationError("instance " + id + ": sentence contains the separator");
    }
  }
  const std::size_t joined = JoinedLength(instance.sentences);
  if (joined > static_cast<std::size_t>(limits.max_input_chars)) {
    throw ValidationError("instance " + id + ": input is " +
                          std::to_string(joined) + " chars, limit " +
                          std::to_string(limits.max_input_chars));
  }
  const std::size_t target = CharLength(instance.summary);
  if (target > static_cast<std::size_t>(limits.max_target_chars)) {
    throw ValidationError("instance " + id + ": summary is " +
                          std::to_string(target) + " chars, limit " +
                          std::to_string(limits.max_target_chars));
  }
  if (instance.labels) {
    const auto n = instance.sentences.size();
    if (instance.labels->labels.size() != n ||
        instance.labels->overlap_rates.size() != n) {
      throw ValidationError("instance " + id + ": label count != sentence count");
    }
  }
}

void ValidateUniquePairs(const std::vector<Instance>& instances) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& inst : instances) {
    if (!seen.emplace(inst.product_id, inst.aspect.name).second) {
      throw ValidationError("duplicate (product_id, aspect) pair (" +
                            inst.product_id + ", " + inst.aspect.name + ")");
    }
  }
}

// ---- JSONL ----------------------------------------------------------------------

namespace {

template <typename T>
T Field(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'", line);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type", line);
  }
}

std::vector<std::string> ReadLines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

bool Blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<Instance> LoadCorpus(const std::filesystem::path& path, Split split,
                                 const LoadOptions& options) {
  std::vector<Instance> out;
  std::map<std::string, int> assigned;
  const auto lines = ReadLines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (Blank(lines[n])) continue;
    json j;
    try {
      j = json::parse(lines[n]);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError("record is not an object", line_no);
    Instance inst;
    inst.product_id = Field<std::string>(j, "product_id", line_no);
    inst.category = Field<std::string>(j, "category", line_no);
    inst.sentences = Field<std::vector<std::string>>(j, "sentences", line_no);
    inst.summary = Field<std::string>(j, "summary", line_no);
    const auto aspect_name = Field<std::string>(j, "aspect", line_no);
    if (options.schema) {
      try {
        inst.aspect = options.schema->Find(aspect_name);
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), line_no);
      }
    } else {
      auto [it, fresh] =
          assigned.emplace(aspect_name, static_cast<int>(assigned.size()));
      inst.aspect = {aspect_name, it->second};
    }
    inst.split = split;
    if (j.contains("labels") || j.contains("overlap_rates")) {
      SentenceLabelSet labels;
      labels.labels = Field<std::vector<int>>(j, "labels", line_no);
      labels.overlap_rates = Field<std::vector<double>>(j, "overlap_rates", line_no);
      if (j.contains("threshold")) labels.threshold = Field<double>(j, "threshold", line_no);
      inst.labels = std::move(labels);
    }
    try {
      DecodeUtf8(inst.summary);
      for (const auto& s : inst.sentences) DecodeUtf8(s);
      ValidateInstance(inst, options.limits);
    } catch (const std::runtime_error& e) {
      throw ParseError(e.what(), line_no);
    }
    out.push_back(std::move(inst));
  }
  if (split != Split::kTrain) ValidateUniquePairs(out);
  return out;
}

std::vector<ProductRecord> LoadProducts(const std::filesystem::path& path) {
  std::vector<ProductRecord> out;
  std::set<std::string> ids;
  const auto lines = ReadLines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (Blank(lines[n])) continue;
    json j;
    try {
      j = json::parse(lines[n]);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError("record is not an object", line_no);
    ProductRecord p;
    p.product_id = Field<std::string>(j, "product_id", line_no);
    p.category = Field<std::string>(j, "category", line_no);
    p.title = Field<std::string>(j, "title", line_no);
    p.detail_sentences = Field<std::vector<std::string>>(j, "details", line_no);
    if (j.contains("raw_summary") && !j["raw_summary"].is_null()) {
      p.raw_summary = Field<std::string>(j, "raw_summary", line_no);
    }
    if (p.product_id.empty()) throw ParseError("empty product_id", line_no);
    if (!ids.insert(p.product_id).second) {
      throw ParseError("duplicate product_id " + p.product_id, line_no);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string InstanceToJsonLine(const Instance& instance) {
  json j;
  j["product_id"] = instance.product_id;
  j["category"] = instance.category;
  j["sentences"] = instance.sentences;
  j["aspect"] = instance.aspect.name;
  j["summary"] = instance.summary;
  if (instance.labels) {
    j["overlap_rates"] = instance.labels->overlap_rates;
    j["labels"] = instance.labels->labels;
  }
  return j.dump();
}

std::string ProductToJsonLine(const ProductRecord& product) {
  json j;
  j["product_id"] = product.product_id;
  j["category"] = product.category;
  j["title"] = product.title;
  j["details"] = product.detail_sentences;
  if (product.raw_summary) j["raw_summary"] = *product.raw_summary;
  return j.dump();
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void WriteInstances(const std::filesystem::path& path,
                    const std::vector<Instance>& instances) {
  std::string buf;
  for (const auto& inst : instances) {
    buf += InstanceToJsonLine(inst);
    buf += '\n';
  }
  WriteFileAtomic(path, buf);
}

void WriteProducts(const std::filesystem::path& path,
                   const std::vector<ProductRecord>& products) {
  std::string buf;
  for (const auto& p : products) {
    buf += ProductToJsonLine(p);
    buf += '\n';
  }
  WriteFileAtomic(path, buf);
}

// ---- Fragments and clustering -----------------------------------------------------

std::vector<std::string> SplitFragments(std::string_view raw_summary, int min_chars,
                                        int max_chars, char32_t separator) {
  if (min_chars > max_chars) {
    throw std::invalid_argument("min_chars must not exceed max_chars");
  }
  std::vector<std::string> out;
  for (const auto& piece : SplitOn(DecodeUtf8(raw_summary), separator)) {
    const auto len = static_cast<int>(piece.size());
    if (len >= min_chars && len <= max_chars) out.push_back(EncodeUtf8(piece));
  }
  return out;
}

TfidfEmbedder TfidfEmbedder::Fit(const std::vector<std::string>& documents,
                                 int max_n) {
  if (max_n < 1) throw std::invalid_argument("max_n must be >= 1");
  TfidfEmbedder e;
  e.max_n_ = max_n;
  std::map<std::u32string, std::size_t> df;
  for (const auto& doc : documents) {
    const auto chars = DecodeUtf8(doc);
    std::set<std::u32string> grams;
    for (int n = 1; n <= max_n; ++n) {
      for (std::size_t i = 0; i + n <= chars.size(); ++i) {
        grams.insert(chars.substr(i, n));
      }
    }
    for (const auto& g : grams) ++df[g];
  }
  const double n_docs = static_cast<double>(documents.size());
  for (const auto& [gram, count] : df) {
    e.index_.emplace(gram, e.idf_.size());
    // Smoothed idf.
    e.idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return e;
}

std::vector<double> TfidfEmbedder::operator()(std::string_view text) const {
  std::vector<double> v(idf_.size(), 0.0);
  const auto chars = DecodeUtf8(text);
  for (int n = 1; n <= max_n_; ++n) {
    for (std::size_t i = 0; i + n <= chars.size(); ++i) {
      auto it = index_.find(chars.substr(i, n));
      if (it != index_.end()) v[it->second] += 1.0;
    }
  }
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] *= idf_[i];
    norm += v[i] * v[i];
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
  }
  return v;
}

namespace {

double SquaredDistance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

int Nearest(const std::vector<double>& p,
            const std::vector<std::vector<double>>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = SquaredDistance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

std::vector<int> KMeans(const std::vector<std::vector<double>>& points, int k,
                        std::uint64_t seed, const KMeansOptions& options) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (points.empty()) throw std::invalid_argument("k-means needs at least one point");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw std::invalid_argument("points differ in dimension");
  }
  const std::set<std::vector<double>> distinct(points.begin(), points.end());
  if (static_cast<std::size_t>(k) > distinct.size()) {
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the " +
                                std::to_string(distinct.size()) +
                                " distinct embedded points");
  }

  // k-means++ seeding.
  Rng rng(seed);
  std::vector<std::vector<double>> centroids;
  centroids.push_back(points[rng.Below(points.size())]);
  std::vector<double> d2(points.size());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, SquaredDistance(points[i], c));
      d2[i] = best;
      total += best;
    }
    double target = rng.Unit() * total;
    std::size_t pick = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      target -= d2[i];
      if (target < 0.0) break;
    }
    centroids.push_back(points[pick]);
  }

  std::vector<int> assign(points.size(), -1);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int c = Nearest(points[i], centroids);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++counts[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += points[i][d];
    }
    for (int c = 0; c < k; ++c) {
      // An emptied cluster keeps its previous centroid.
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
  }
  return assign;
}

std::vector<int> ClusterFragments(const std::vector<std::string>& fragments, int k,
                                  const Embedder& embedder, std::uint64_t seed) {
  if (fragments.empty()) throw std::invalid_argument("no fragments to cluster");
  std::vector<std::vector<double>> points;
  points.reserve(fragments.size());
  for (const auto& f : fragments) points.push_back(embedder(f));
  return KMeans(points, k, seed);
}

// ---- Dataset building ----------------------------------------------------------------

Split AssignSplit(std::string_view product_id, std::uint64_t seed,
                  const SplitRatios& ratios) {
  std::uint64_t h = Fnv1a(&seed, sizeof(seed));
  h = Fnv1a(product_id.data(), product_id.size(), h);
  // Finalizer so nearby ids spread over [0, 1).
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  const double total = ratios.train + ratios.dev + ratios.test;
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53 * total;
  if (u < ratios.train) return Split::kTrain;
  if (u < ratios.train + ratios.dev) return Split::kDev;
  return Split::kTest;
}

const std::vector<Instance>& Dataset::Get(Split split) const {
  switch (split) {
    case Split::kTrain:
      return train;
    case Split::kDev:
      return dev;
    case Split::kTest:
      return test;
  }
  return train;
}

std::vector<Instance>& Dataset::Get(Split split) {
  return const_cast<std::vector<Instance>&>(std::as_const(*this).Get(split));
}

namespace {

// Title pieces followed by details, trimmed to the input budget.
std::vector<std::string> ProductSentences(const ProductRecord& p,
                                          const CorpusLimits& limits) {
  std::vector<std::string> all;
  for (auto& piece : SplitOn(DecodeUtf8(p.title), limits.separator)) {
    if (!piece.empty()) all.push_back(EncodeUtf8(piece));
  }
  for (const auto& s : p.detail_sentences) {
    if (!s.empty()) all.push_back(s);
  }
  std::vector<std::string> kept;
  std::size_t used = 0;
  for (const auto& s : all) {
    const std::size_t len = CharLength(s) + 1;
    if (used + len > static_cast<std::size_t>(limits.max_input_chars)) {
      if (kept.empty()) {
        const auto chars = DecodeUtf8(s);
        kept.push_back(EncodeUtf8(chars.substr(0, limits.max_input_chars - 1)));
      }
      break;
    }
    kept.push_back(s);
    used += len;
  }
  return kept;
}

}  // namespace

Dataset BuildDataset(const std::vector<ProductRecord>& products,
                     const CategorySchema& schema, std::uint64_t seed,
                     const BuildOptions& options) {
  schema.Validate();
  std::set<std::string> ids;
  for (const auto& p : products) {
    ValidateProduct(p, options.limits);
    if (!ids.insert(p.product_id).second) {
      throw ValidationError("duplicate product_id " + p.product_id);
    }
    if (!p.raw_summary) {
      throw ValidationError("product " + p.product_id + " has no raw_summary");
    }
  }

  struct Frag {
    std::size_t product;
    std::string text;
  };
  std::vector<Frag> frags;
  std::vector<std::string> empty_products;
  std::vector<bool> usable(products.size(), true);
  for (std::size_t i = 0; i < products.size(); ++i) {
    auto pieces = SplitFragments(*products[i].raw_summary, options.min_fragment_chars,
                                 options.max_fragment_chars, options.limits.separator);
    std::erase_if(pieces, [&](const std::string& f) {
      return CharLength(f) > static_cast<std::size_t>(options.limits.max_target_chars);
    });
    if (pieces.empty()) {
      empty_products.push_back(products[i].product_id);
      usable[i] = false;
    }
    for (auto& f : pieces) frags.push_back({i, std::move(f)});
  }
  if (!empty_products.empty() && (!options.skip_empty_products || frags.empty())) {
    std::string msg = "no fragments survive filtering for products:";
    for (const auto& id : empty_products) msg += " " + id;
    throw ValidationError(msg);
  }

  std::vector<std::string> texts;
  texts.reserve(frags.size());
  for (const auto& f : frags) texts.push_back(f.text);
  Embedder embedder = options.embedder;
  if (!embedder) {
    auto tfidf = std::make_shared<TfidfEmbedder>(TfidfEmbedder::Fit(texts));
    embedder = [tfidf](std::string_view s) { return (*tfidf)(s); };
  }
  const auto clusters = ClusterFragments(texts, schema.cluster_count, embedder, seed);

  Dataset out;
  std::set<std::pair<std::size_t, int>> seen;
  std::vector<std::vector<std::string>> sentences(products.size());
  for (std::size_t i = 0; i < products.size(); ++i) {
    if (usable[i]) sentences[i] = ProductSentences(products[i], options.limits);
  }
  for (std::size_t f = 0; f < frags.size(); ++f) {
    const auto& p = products[frags[f].product];
    const Split split = AssignSplit(p.product_id, seed, options.ratios);
    const int cluster = clusters[f];
    if (split != Split::kTrain && !seen.emplace(frags[f].product, cluster).second) {
      continue;  // first fragment per (product, aspect) wins
    }
    Instance inst;
    inst.product_id = p.product_id;
    inst.category = p.category;
    inst.sentences = sentences[frags[f].product];
    inst.aspect = schema.aspects[cluster];
    inst.summary = frags[f].text;
    inst.split = split;
    ValidateInstance(inst, options.limits);
    out.Get(split).push_back(std::move(inst));
  }
  return out;
}

// ---- Synthetic corpus ------------------------------------------------------------------

Dataset SynthCorpus::ToDataset() const {
  Dataset d;
  for (const auto& inst : instances) d.Get(inst.split).push_back(inst);
  return d;
}

namespace {

constexpr std::string_view kNoiseAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

std::string Draw(Rng& rng, std::string_view alphabet, int len) {
  std::string s;
  for (int i = 0; i < len; ++i) s.push_back(alphabet[rng.Below(alphabet.size())]);
  return s;
}

}  // namespace

SynthCorpus SynthesizeCorpus(std::uint64_t seed, int n_products,
                             const CategorySchema& schema) {
  schema.Validate();
  const int k = static_cast<int>(schema.aspects.size());
  if (k > 8) throw std::invalid_argument("synthetic corpora support at most 8 aspects");
  const int letters = 26 / k;

  struct AspectLexicon {
    std::string alphabet;
    std::array<std::string, 2> keys;
    std::string summary_prefix;
  };
  std::vector<AspectLexicon> lex(k);
  for (int a = 0; a < k; ++a) {
    auto& l = lex[a];
    for (int i = 0; i < letters; ++i) l.alphabet.push_back(static_cast<char>('a' + a * letters + i));
    l.keys = {std::string{l.alphabet[0], l.alphabet[1]},
              std::string{l.alphabet[1], l.alphabet[0]}};
    l.summary_prefix = {l.alphabet[letters - 1], l.alphabet[letters - 2], l.alphabet[0]};
  }

  SynthCorpus corpus;
  Rng rng(seed);
  for (int p = 0; p < n_products; ++p) {
    std::ostringstream id;
    id << "synth-" << std::setw(5) << std::setfill('0') << p;

    ProductRecord product;
    product.product_id = id.str();
    product.category = schema.category;
    product.title = "P" + Draw(rng, kNoiseAlphabet, 5);

    struct Tagged {
      std::string text;
      int aspect;  // -1 for noise
    };
    std::vector<Tagged> details;
    std::vector<std::string> summaries(k);
    for (int a = 0; a < k; ++a) {
      std::string summary = lex[a].summary_prefix;
      const int n_sent = rng.Between(1, 2);
      for (int s = 0; s < n_sent; ++s) {
        const std::string value = Draw(rng, lex[a].alphabet, rng.Between(4, 6));
        details.push_back({lex[a].keys[rng.Below(2)] + value, a});
        summary += value;
      }
      summaries[a] = summary;
    }
    const int n_noise = rng.Between(0, 2);
    for (int s = 0; s < n_noise; ++s) {
      details.push_back({Draw(rng, kNoiseAlphabet, rng.Between(5, 8)), -1});
    }
    rng.Shuffle(details);

    std::string raw;
    for (const auto& s : summaries) raw += s + ".";
    product.raw_summary = raw;
    for (const auto& d : details) product.detail_sentences.push_back(d.text);

    const Split split = AssignSplit(product.product_id, seed);
    for (int a = 0; a < k; ++a) {
      Instance inst;
      inst.product_id = product.product_id;
      inst.category = product.category;
      inst.sentences.push_back(product.title);
      std::vector<int> gold{0};
      for (const auto& d : details) {
        inst.sentences.push_back(d.text);
        gold.push_back(d.aspect == a ? 1 : 0);
      }
      inst.aspect = schema.aspects[a];
      inst.summary = summaries[a];
      inst.split = split;
      corpus.instances.push_back(std::move(inst));
      corpus.gold_labels.push_back(std::move(gold));
    }
    corpus.products.push_back(std::move(product));
  }
  return corpus;
}

// ---- Statistics ------------------------------------------------------------------------

namespace {

SplitStats StatsOf(const std::vector<const Instance*>& instances) {
  SplitStats s;
  std::set<std::string> products;
  for (const auto* inst : instances) {
    ++s.summaries;
    products.insert(inst->product_id);
    ++s.per_aspect[inst->aspect.name];
  }
  s.products = products.size();
  return s;
}

std::vector<const Instance*> Pointers(const std::vector<Instance>& v) {
  std::vector<const Instance*> out;
  for (const auto& inst : v) out.push_back(&inst);
  return out;
}

}  // namespace

CorpusStats ComputeCorpusStats(const Dataset& dataset) {
  CorpusStats stats;
  stats.train = StatsOf(Pointers(dataset.train));
  stats.dev = StatsOf(Pointers(dataset.dev));
  stats.test = StatsOf(Pointers(dataset.test));
  auto all = Pointers(dataset.train);
  for (const auto* p : Pointers(dataset.dev)) all.push_back(p);
  for (const auto* p : Pointers(dataset.test)) all.push_back(p);
  stats.overall = StatsOf(all);
  return stats;
}

std::string FormatStatsTable(const CorpusStats& stats, std::string_view category) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "Category";
  for (const char* col : {"Overall", "Train", "Dev", "Test"}) {
    out << std::setw(20) << col;
  }
  out << '\n' << std::setw(14) << "";
  for (int i = 0; i < 4; ++i) out << std::setw(10) << "#sum" << std::setw(10) << "#prod";
  out << '\n' << std::setw(14) << category;
  for (const auto* s : {&stats.overall, &stats.train, &stats.dev, &stats.test}) {
    out << std::setw(10) << s->summaries << std::setw(10) << s->products;
  }
  out << '\n';
  return out.str();
}

}  // namespace extsum
