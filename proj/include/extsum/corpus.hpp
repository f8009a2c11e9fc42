#ifndef EXTSUM_CORPUS_HPP
#define EXTSUM_CORPUS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "extsum/labeling.hpp"

namespace extsum {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Split { kTrain, kDev, kTest };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct AspectCategory {
  std::string name;
  int index = 0;

  friend bool operator==(const AspectCategory&, const AspectCategory&) = default;
};

struct CategorySchema {
  std::string category;
  std::vector<AspectCategory> aspects;
  int cluster_count = 0;

  static CategorySchema FromNames(std::string category,
                                  const std::vector<std::string>& names);
  // "cluster_0" ... "cluster_<k-1>".
  static CategorySchema Clusters(std::string category, int k);

  void Validate() const;
  // Throws ValidationError for an unknown name.
  const AspectCategory& Find(std::string_view name) const;
};

struct ProductRecord {
  std::string product_id;
  std::string category;
  std::string title;
  std::vector<std::string> detail_sentences;
  std::optional<std::string> raw_summary;
};

struct Instance {
  std::string product_id;
  std::string category;
  std::vector<std::string> sentences;
  AspectCategory aspect;
  std::string summary;
  Split split = Split::kTrain;
  // Present once the instance has been through the labeler.
  std::optional<SentenceLabelSet> labels;
};

struct CorpusLimits {
  int max_input_chars = 400;
  int max_target_chars = 70;
  char32_t separator = U'.';
};

// Character length of the model input: every sentence is terminated by the
// separator, so this is sum(len(s) + 1).
std::size_t JoinedLength(const std::vector<std::string>& sentences);

void ValidateProduct(const ProductRecord& product, const CorpusLimits& limits);
void ValidateInstance(const Instance& instance, const CorpusLimits& limits);
// (product_id, aspect) uniqueness for dev/test collections.
void ValidateUniquePairs(const std::vector<Instance>& instances);

// ---- JSONL ----------------------------------------------------------------

struct LoadOptions {
  CorpusLimits limits;
  // When set, aspect names must belong to it. Otherwise indices are assigned
  // in order of first appearance.
  std::optional<CategorySchema> schema;
};

std::vector<Instance> LoadCorpus(const std::filesystem::path& path, Split split,
                                 const LoadOptions& options = {});
std::vector<ProductRecord> LoadProducts(const std::filesystem::path& path);

std::string InstanceToJsonLine(const Instance& instance);
std::string ProductToJsonLine(const ProductRecord& product);

// Writes to a temporary sibling and renames into place.
void WriteInstances(const std::filesystem::path& path,
                    const std::vector<Instance>& instances);
void WriteProducts(const std::filesystem::path& path,
                   const std::vector<ProductRecord>& products);
void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents);

// ---- Dataset construction ---------------------------------------------------

std::vector<std::string> SplitFragments(std::string_view raw_summary,
                                        int min_chars = 15, int max_chars = 55,
                                        char32_t separator = U'.');

using Embedder = std::function<std::vector<double>(std::string_view)>;

// Character n-gram TF-IDF vectors (n = 1..max_n), L2 normalised, with the
// n-gram vocabulary and document frequencies fitted on `documents`.
class TfidfEmbedder {
 public:
  static TfidfEmbedder Fit(const std::vector<std::string>& documents,
                           int max_n = 2);
  std::vector<double> operator()(std::string_view text) const;
  std::size_t dimension() const { return idf_.size(); }

 private:
  int max_n_ = 2;
  std::map<std::u32string, std::size_t> index_;
  std::vector<double> idf_;
};

struct KMeansOptions {
  int max_iterations = 100;
};

// Seeded k-means++ on the given points. Ties in nearest-centroid assignment
// go to the lowest cluster id.
std::vector<int> KMeans(const std::vector<std::vector<double>>& points, int k,
                        std::uint64_t seed, const KMeansOptions& options = {});

std::vector<int> ClusterFragments(const std::vector<std::string>& fragments,
                                  int k, const Embedder& embedder,
                                  std::uint64_t seed);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

// Stable in (product_id, seed).
Split AssignSplit(std::string_view product_id, std::uint64_t seed,
                  const SplitRatios& ratios = {});

struct Dataset {
  std::vector<Instance> train;
  std::vector<Instance> dev;
  std::vector<Instance> test;

  const std::vector<Instance>& Get(Split split) const;
  std::vector<Instance>& Get(Split split);
};

struct BuildOptions {
  CorpusLimits limits;
  int min_fragment_chars = 15;
  int max_fragment_chars = 55;
  SplitRatios ratios;
  // Empty: TF-IDF fitted on all surviving fragments.
  Embedder embedder;
  // Drop products with no surviving fragment instead of failing.
  bool skip_empty_products = false;
};

Dataset BuildDataset(const std::vector<ProductRecord>& products,
                     const CategorySchema& schema, std::uint64_t seed,
                     const BuildOptions& options = {});

// ---- Synthetic corpus ---------------------------------------------------------

struct SynthCorpus {
  std::vector<ProductRecord> products;
  // One instance per (product, aspect); split assigned by AssignSplit.
  std::vector<Instance> instances;
  // gold_labels[j][i] == 1 iff sentence i of instances[j] belongs to its aspect.
  std::vector<std::vector<int>> gold_labels;

  Dataset ToDataset() const;
};

// Products are built from aspect-tagged templates over disjoint per-aspect
// letter alphabets, so LCS labels at 0.35 recover the gold sentence tags.
SynthCorpus SynthesizeCorpus(std::uint64_t seed, int n_products,
                             const CategorySchema& schema);

// ---- Statistics --------------------------------------------------------------

struct SplitStats {
  std::size_t summaries = 0;
  std::size_t products = 0;
  std::map<std::string, std::size_t> per_aspect;
};

struct CorpusStats {
  SplitStats overall;
  SplitStats train;
  SplitStats dev;
  SplitStats test;
};

CorpusStats ComputeCorpusStats(const Dataset& dataset);
// Table with columns Overall/Train/Dev/Test x (#sum, #prod).
std::string FormatStatsTable(const CorpusStats& stats, std::string_view category);

}  // namespace extsum

#endif  // EXTSUM_CORPUS_HPP
