#ifndef EXTSUM_TESTS_TEST_UTIL_HPP
#define EXTSUM_TESTS_TEST_UTIL_HPP

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "extsum/corpus.hpp"
#include "extsum/model.hpp"

namespace extsum::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("extsum-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Instance MakeInstance(std::string product, std::vector<std::string> sentences,
                             std::string aspect, int aspect_index, std::string summary) {
  Instance inst;
  inst.product_id = std::move(product);
  inst.category = "test";
  inst.sentences = std::move(sentences);
  inst.aspect = {std::move(aspect), aspect_index};
  inst.summary = std::move(summary);
  return inst;
}

// Three sentences, twelve characters including separators.
inline std::vector<Instance> TinyInstances() {
  std::vector<Instance> out;
  out.push_back(MakeInstance("p1", {"abc", "dxe", "fgh"}, "a0", 0, "bd"));
  out.push_back(MakeInstance("p1", {"abc", "dxe", "fgh"}, "a1", 1, "gh"));
  out.push_back(MakeInstance("p2", {"hga", "edc", "bxf"}, "a0", 0, "ce"));
  out.push_back(MakeInstance("p2", {"hga", "edc", "bxf"}, "a1", 1, "ah"));
  const std::vector<std::vector<int>> labels = {{1, 1, 0}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0}};
  for (std::size_t i = 0; i < out.size(); ++i) {
    SentenceLabelSet set;
    set.labels = labels[i];
    set.overlap_rates.assign(labels[i].begin(), labels[i].end());
    out[i].labels = set;
  }
  return out;
}

inline ModelConfig TinyConfig(ExtractorHead head, EncoderKind kind) {
  ModelConfig c;
  c.embed_dim = 8;
  c.hidden_dim = 8;
  c.extractor_head = head;
  c.encoder_kind = kind;
  c.num_aspects = 2;
  c.max_input_chars = 64;
  c.init_scale = 0.5;
  c.seed = 3;
  return c;
}

inline ExtModel TinyModel(ExtractorHead head = ExtractorHead::kBilinear,
                          EncoderKind kind = EncoderKind::kRecurrent,
                          bool use_extractor = true) {
  ModelConfig c = TinyConfig(head, kind);
  c.use_extractor = use_extractor;
  return ExtModel(c, Vocabulary::Build(TinyInstances()), {"a0", "a1"});
}

}  // namespace extsum::testing

#endif  // EXTSUM_TESTS_TEST_UTIL_HPP
