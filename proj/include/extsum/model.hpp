#ifndef EXTSUM_MODEL_HPP
#define EXTSUM_MODEL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extsum/corpus.hpp"
#include "extsum/fusion.hpp"
#include "extsum/graph.hpp"

namespace extsum {

// ---- Vocabulary ------------------------------------------------------------------

// Character-level vocabulary. Ids 0..2 are <unk>, <bos>, <eos>.
class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;

  // Specials, the separator, then every character of the sentences and
  // summaries in first-seen order.
  static Vocabulary Build(const std::vector<Instance>& instances,
                          char32_t separator = U'.');
  // Inverse of tokens(); the first three entries must be the specials.
  static Vocabulary FromTokens(const std::vector<std::string>& tokens,
                               char32_t separator = U'.');

  int Id(char32_t c) const;
  bool Contains(char32_t c) const { return ids_.count(c) > 0; }
  const std::string& Token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  int separator_id() const { return separator_id_; }
  char32_t separator() const { return separator_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  void AddChar(char32_t c);

  std::vector<std::string> tokens_;
  std::map<char32_t, int> ids_;
  char32_t separator_ = U'.';
  int separator_id_ = -1;
};

struct SentenceBoundaries {
  // Position of the separator terminating sentence i.
  std::vector<int> period_indices;
  // Word position -> owning sentence; separators belong to their sentence.
  std::vector<int> sentence_map;

  int sentence_count() const { return static_cast<int>(period_indices.size()); }
};

// Throws std::invalid_argument when the sequence is empty or does not end
// with a separator.
SentenceBoundaries ComputeBoundaries(std::span<const int> token_ids, int separator_id);

struct SourceInput {
  std::vector<int> token_ids;     // base vocabulary, OOV -> <unk>
  std::vector<int> extended_ids;  // OOV -> vocab_size + j
  std::vector<std::string> oov_tokens;
  SentenceBoundaries boundaries;

  int extended_size(int vocab_size) const {
    return vocab_size + static_cast<int>(oov_tokens.size());
  }
};

// Sentences joined with the separator, each one terminated.
SourceInput PrepareSource(const std::vector<std::string>& sentences,
                          const Vocabulary& vocab);
// Extended ids of the summary followed by <eos>. Characters that are neither
// in the vocabulary nor in the source map to <unk>.
std::vector<int> PrepareTarget(std::string_view summary, const Vocabulary& vocab,
                               const SourceInput& source);
// Inverse of PrepareTarget for generated ids (stops at <eos>).
std::string DecodeTokens(std::span<const int> ids, const Vocabulary& vocab,
                         const SourceInput& source);

// ---- Configuration ----------------------------------------------------------------

enum class ExtractorHead { kBilinear, kFfn };
enum class EncoderKind { kRecurrent, kTransformer };

std::string_view ToString(ExtractorHead head);
std::string_view ToString(EncoderKind kind);
ExtractorHead ParseExtractorHead(std::string_view s);
EncoderKind ParseEncoderKind(std::string_view s);

struct ModelConfig {
  int embed_dim = 32;
  int hidden_dim = 32;
  // Filled in from the vocabulary when the model is constructed.
  int vocab_size = 0;
  int max_input_chars = 400;
  int max_target_chars = 70;
  int batch_size = 20;
  ExtractorHead extractor_head = ExtractorHead::kBilinear;
  EncoderKind encoder_kind = EncoderKind::kRecurrent;
  // false gives the aspect-conditioned model without the extractor.
  bool use_extractor = true;
  // Sinusoidal position features for the transformer encoder.
  bool use_positions = true;
  int num_aspects = 1;
  std::uint64_t seed = 1;
  double init_scale = 0.1;

  void Validate() const;
};

// ---- Forward-pass value types ------------------------------------------------------------

// Column m is word m.
struct FusedEmbedding {
  Mat word_embeddings;  // d x |w|
  Vec aspect_embedding;  // d
  Mat fused;             // d x |w|
};

struct EncoderOutputs {
  Mat word_reps;      // h x |w|
  Mat sentence_reps;  // h x N
  std::vector<int> period_indices;
  std::vector<int> sentence_map;
};

struct AttentionState {
  Vec word_attention;
  Vec sentence_scores;
  Vec fused_attention;
  Vec context;
};

// p_gen * P_vocab (zero-padded to extended_size) plus (1 - p_gen) times the
// attention scattered onto the source's extended ids.
Vec MixCopyDistribution(const Vec& vocab_distribution, double p_gen,
                        const Vec& attention, std::span<const int> extended_ids,
                        int extended_size);

// ---- Model ---------------------------------------------------------------------------

class ExtModel {
 public:
  ExtModel(ModelConfig config, Vocabulary vocab, std::vector<std::string> aspect_names);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<std::string>& aspect_names() const { return aspect_names_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  // Index of the learned null-aspect embedding.
  int null_aspect() const { return config_.num_aspects; }
  int AspectIndex(std::string_view name) const;
  // Parameters used only by the extractor head (empty with use_extractor off).
  std::vector<std::string> ExtractorOnlyParams() const;

  // Uniform(-init_scale, init_scale) from config().seed.
  void Initialize();

  // ---- Graph builders (shared by training, decoding and the value API) ----
  struct Encoded {
    Expr aspect;          // d
    Expr word_reps;       // h x |w|
    Expr sentence_reps;   // h x N
    Expr scores;          // N x 1, invalid when use_extractor is off
    Expr attention_keys;  // h x |w|
    Expr init_state;      // h
  };
  struct DecoderState {
    Expr hidden;
    Expr context;
  };
  struct Step {
    Expr distribution;  // extended vocabulary
    Expr word_attention;
    Expr fused_attention;
    Expr vocab_distribution;
    Expr p_gen;
    DecoderState next;
  };
  struct Losses {
    Expr ext;  // invalid when the extractor is off or no labels were given
    Expr gen;
    Expr total;
    int target_length = 0;
  };

  Expr BuildFused(Graph& g, std::span<const int> token_ids, Expr aspect) const;
  // Returns word_reps and sentence_reps.
  std::pair<Expr, Expr> BuildEncoder(Graph& g, Expr fused,
                                     const SentenceBoundaries& boundaries) const;
  Expr BuildExtractor(Graph& g, Expr sentence_reps, Expr aspect) const;
  Encoded BuildEncoded(Graph& g, const SourceInput& source, int aspect) const;
  DecoderState InitialState(Graph& g, const Encoded& enc) const;
  Step BuildStep(Graph& g, const Encoded& enc, const SourceInput& source,
                 int prev_token, const DecoderState& state) const;
  // Teacher-forced losses. `labels` may be empty, in which case no extractor
  // loss is added.
  Losses BuildLoss(Graph& g, const SourceInput& source, int aspect,
                   std::span<const int> target, std::span<const int> labels,
                   double ext_weight = 1.0) const;

  // ---- Value API ----
  FusedEmbedding EmbedFused(std::span<const int> token_ids, int aspect) const;
  EncoderOutputs Encode(const FusedEmbedding& fused, const SentenceBoundaries& boundaries) const;
  // Sentence scores for the given representations (h x N) and aspect.
  Vec ExtractorScore(const Mat& sentence_reps, int aspect) const;
  LossBundle ComputeLoss(const SourceInput& source, int aspect,
                         std::span<const int> target, std::span<const int> labels,
                         double ext_weight = 1.0) const;

 private:
  void CreateParams();

  ModelConfig config_;
  Vocabulary vocab_;
  std::vector<std::string> aspect_names_;
  ParameterStore params_;
  Mat positions_;  // h x max_input_chars sinusoidal table
};

// ---- Checkpoints ---------------------------------------------------------------------

inline constexpr std::string_view kCheckpointMagic = "EXTSUMM-CKPT-v1";

void SaveCheckpoint(const ExtModel& model, const std::filesystem::path& path);
ExtModel LoadCheckpoint(const std::filesystem::path& path);

}  // namespace extsum

#endif  // EXTSUM_MODEL_HPP
