#include "extsum/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "extsum/random.hpp"
#include "extsum/text.hpp"

namespace extsum {

// ---- Vocabulary ----------------------------------------------------------------------

namespace {
const std::vector<std::string> kSpecials = {"<unk>", "<bos>", "<eos>"};
}  // namespace

void Vocabulary::AddChar(char32_t c) {
  if (ids_.count(c)) return;
  ids_[c] = size();
  tokens_.push_back(EncodeUtf8(c));
}

Vocabulary Vocabulary::Build(const std::vector<Instance>& instances, char32_t separator) {
  Vocabulary v;
  v.tokens_ = kSpecials;
  v.separator_ = separator;
  v.AddChar(separator);
  v.separator_id_ = v.ids_.at(separator);
  for (const auto& inst : instances) {
    for (const auto& s : inst.sentences) {
      for (char32_t c : DecodeUtf8(s)) v.AddChar(c);
    }
    for (char32_t c : DecodeUtf8(inst.summary)) v.AddChar(c);
  }
  return v;
}

Vocabulary Vocabulary::FromTokens(const std::vector<std::string>& tokens,
                                  char32_t separator) {
  if (tokens.size() < kSpecials.size() ||
      !std::equal(kSpecials.begin(), kSpecials.end(), tokens.begin())) {
    throw std::invalid_argument("vocabulary must start with <unk>, <bos>, <eos>");
  }
  Vocabulary v;
  v.tokens_ = kSpecials;
  v.separator_ = separator;
  for (std::size_t i = kSpecials.size(); i < tokens.size(); ++i) {
    const auto chars = DecodeUtf8(tokens[i]);
    if (chars.size() != 1) {
      throw std::invalid_argument("vocabulary token is not a single character: " + tokens[i]);
    }
    if (v.ids_.count(chars[0])) {
      throw std::invalid_argument("duplicate vocabulary token: " + tokens[i]);
    }
    v.AddChar(chars[0]);
  }
  auto it = v.ids_.find(separator);
  if (it == v.ids_.end()) throw std::invalid_argument("separator missing from vocabulary");
  v.separator_id_ = it->second;
  return v;
}

int Vocabulary::Id(char32_t c) const {
  auto it = ids_.find(c);
  return it == ids_.end() ? kUnk : it->second;
}

SentenceBoundaries ComputeBoundaries(std::span<const int> token_ids, int separator_id) {
  if (token_ids.empty()) throw std::invalid_argument("empty token sequence");
  if (token_ids.back() != separator_id) {
    throw std::invalid_argument("last sentence has no terminating separator");
  }
  SentenceBoundaries b;
  int sentence = 0;
  for (std::size_t m = 0; m < token_ids.size(); ++m) {
    b.sentence_map.push_back(sentence);
    if (token_ids[m] == separator_id) {
      b.period_indices.push_back(static_cast<int>(m));
      ++sentence;
    }
  }
  return b;
}

SourceInput PrepareSource(const std::vector<std::string>& sentences,
                          const Vocabulary& vocab) {
  if (sentences.empty()) throw std::invalid_argument("no input sentences");
  SourceInput src;
  std::map<char32_t, int> oov;
  for (const auto& s : sentences) {
    const auto chars = DecodeUtf8(s);
    if (chars.empty()) throw std::invalid_argument("empty input sentence");
    for (char32_t c : chars) {
      if (c == vocab.separator()) {
        throw std::invalid_argument("input sentence contains the separator");
      }
      if (vocab.Contains(c)) {
        src.token_ids.push_back(vocab.Id(c));
        src.extended_ids.push_back(vocab.Id(c));
      } else {
        auto [it, fresh] = oov.emplace(c, vocab.size() + static_cast<int>(oov.size()));
        if (fresh) src.oov_tokens.push_back(EncodeUtf8(c));
        src.token_ids.push_back(Vocabulary::kUnk);
        src.extended_ids.push_back(it->second);
      }
    }
    src.token_ids.push_back(vocab.separator_id());
    src.extended_ids.push_back(vocab.separator_id());
  }
  src.boundaries = ComputeBoundaries(src.token_ids, vocab.separator_id());
  return src;
}

std::vector<int> PrepareTarget(std::string_view summary, const Vocabulary& vocab,
                               const SourceInput& source) {
  std::vector<int> out;
  for (char32_t c : DecodeUtf8(summary)) {
    if (vocab.Contains(c)) {
      out.push_back(vocab.Id(c));
      continue;
    }
    const std::string tok = EncodeUtf8(c);
    auto it = std::find(source.oov_tokens.begin(), source.oov_tokens.end(), tok);
    out.push_back(it == source.oov_tokens.end()
                      ? Vocabulary::kUnk
                      : vocab.size() + static_cast<int>(it - source.oov_tokens.begin()));
  }
  out.push_back(Vocabulary::kEos);
  return out;
}

std::string DecodeTokens(std::span<const int> ids, const Vocabulary& vocab,
                         const SourceInput& source) {
  std::string out;
  for (int id : ids) {
    if (id == Vocabulary::kEos) break;
    if (id == Vocabulary::kBos) continue;
    if (id >= vocab.size()) {
      out += source.oov_tokens.at(static_cast<std::size_t>(id - vocab.size()));
    } else {
      out += vocab.Token(id);
    }
  }
  return out;
}

// ---- Config --------------------------------------------------------------------------

std::string_view ToString(ExtractorHead head) {
  return head == ExtractorHead::kBilinear ? "bilinear" : "ffn";
}

std::string_view ToString(EncoderKind kind) {
  return kind == EncoderKind::kRecurrent ? "recurrent" : "transformer";
}

ExtractorHead ParseExtractorHead(std::string_view s) {
  if (s == "bilinear") return ExtractorHead::kBilinear;
  if (s == "ffn") return ExtractorHead::kFfn;
  throw std::invalid_argument("unknown extractor head '" + std::string(s) + "'");
}

EncoderKind ParseEncoderKind(std::string_view s) {
  if (s == "recurrent") return EncoderKind::kRecurrent;
  if (s == "transformer") return EncoderKind::kTransformer;
  throw std::invalid_argument("unknown encoder kind '" + std::string(s) + "'");
}

void ModelConfig::Validate() const {
  auto positive = [](int v, const char* key) {
    if (v < 1) throw std::invalid_argument(std::string(key) + " must be >= 1");
  };
  positive(embed_dim, "embed_dim");
  positive(hidden_dim, "hidden_dim");
  positive(max_input_chars, "max_input_chars");
  positive(max_target_chars, "max_target_chars");
  positive(batch_size, "batch_size");
  positive(num_aspects, "num_aspects");
  if (encoder_kind == EncoderKind::kRecurrent && hidden_dim % 2 != 0) {
    throw std::invalid_argument("hidden_dim must be even for the recurrent encoder");
  }
  if (use_extractor && extractor_head == ExtractorHead::kBilinear &&
      embed_dim != hidden_dim) {
    throw std::invalid_argument("the bilinear extractor head needs embed_dim == hidden_dim");
  }
  if (!(init_scale > 0.0)) throw std::invalid_argument("init_scale must be > 0");
}

// ---- Copy distribution ---------------------------------------------------------------

Vec MixCopyDistribution(const Vec& vocab_distribution, double p_gen, const Vec& attention,
                        std::span<const int> extended_ids, int extended_size) {
  if (static_cast<std::size_t>(attention.size()) != extended_ids.size()) {
    throw std::invalid_argument("attention length != number of source ids");
  }
  if (extended_size < vocab_distribution.size()) {
    throw std::invalid_argument("extended vocabulary smaller than base vocabulary");
  }
  Vec out = Vec::Zero(extended_size);
  out.head(vocab_distribution.size()) = p_gen * vocab_distribution;
  for (std::size_t m = 0; m < extended_ids.size(); ++m) {
    out[extended_ids[m]] += (1.0 - p_gen) * attention[static_cast<Eigen::Index>(m)];
  }
  return out;
}

// ---- Model ---------------------------------------------------------------------------

ExtModel::ExtModel(ModelConfig config, Vocabulary vocab,
                   std::vector<std::string> aspect_names)
    : config_(std::move(config)),
      vocab_(std::move(vocab)),
      aspect_names_(std::move(aspect_names)) {
  config_.vocab_size = vocab_.size();
  if (!aspect_names_.empty()) config_.num_aspects = static_cast<int>(aspect_names_.size());
  config_.Validate();
  for (int i = static_cast<int>(aspect_names_.size()); i < config_.num_aspects; ++i) {
    aspect_names_.push_back("aspect_" + std::to_string(i));
  }
  CreateParams();
  Initialize();

  const int h = config_.hidden_dim;
  positions_ = Mat::Zero(h, config_.max_input_chars);
  for (int pos = 0; pos < config_.max_input_chars; ++pos) {
    for (int i = 0; i < h; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / h);
      positions_(i, pos) = i % 2 == 0 ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
}

int ExtModel::AspectIndex(std::string_view name) const {
  for (std::size_t i = 0; i < aspect_names_.size(); ++i) {
    if (aspect_names_[i] == name) return static_cast<int>(i);
  }
  throw std::invalid_argument("unknown aspect '" + std::string(name) + "'");
}

void ExtModel::CreateParams() {
  const int d = config_.embed_dim, h = config_.hidden_dim, v = config_.vocab_size;
  params_.Add("embed.word", d, v);
  params_.Add("embed.aspect", d, config_.num_aspects + 1);

  auto gru = [&](const std::string& prefix, int in, int hidden) {
    params_.Add(prefix + ".W", 3 * hidden, in);
    params_.Add(prefix + ".b", 3 * hidden, 1);
    params_.Add(prefix + ".U", 3 * hidden, hidden);
    params_.Add(prefix + ".bh", 3 * hidden, 1);
  };
  if (config_.encoder_kind == EncoderKind::kRecurrent) {
    gru("enc.word.fwd", d, h / 2);
    gru("enc.word.bwd", d, h / 2);
    if (config_.use_extractor) {
      gru("enc.sent.fwd", h, h / 2);
      gru("enc.sent.bwd", h, h / 2);
    }
  } else {
    params_.Add("enc.in.W", h, d);
    params_.Add("enc.in.b", h, 1);
    for (const char* n : {"enc.attn.Wq", "enc.attn.Wk", "enc.attn.Wv", "enc.attn.Wo",
                          "enc.ffn.W1", "enc.ffn.W2"}) {
      params_.Add(n, h, h);
    }
    params_.Add("enc.ffn.b1", h, 1);
    params_.Add("enc.ffn.b2", h, 1);
  }
  if (config_.use_extractor && config_.extractor_head == ExtractorHead::kFfn) {
    params_.Add("ext.ffn.W1", h, h);
    params_.Add("ext.ffn.b1", h, 1);
    params_.Add("ext.ffn.W2", 1, h);
    params_.Add("ext.ffn.b2", 1, 1);
  }
  params_.Add("dec.init.W", h, h);
  params_.Add("dec.init.b", h, 1);
  gru("dec.gru", d + h, h);
  params_.Add("dec.attn.Wk", h, h);
  params_.Add("dec.attn.Wq", h, h);
  params_.Add("dec.attn.b", h, 1);
  params_.Add("dec.attn.v", h, 1);
  params_.Add("dec.out.W1", h, 2 * h);
  params_.Add("dec.out.b1", h, 1);
  params_.Add("dec.out.W2", v, h);
  params_.Add("dec.out.b2", v, 1);
  params_.Add("dec.gate.W", 1, 2 * h + d);
  params_.Add("dec.gate.b", 1, 1);
}

std::vector<std::string> ExtModel::ExtractorOnlyParams() const {
  std::vector<std::string> out;
  for (const auto& p : params_.all()) {
    if (p->name.rfind("ext.", 0) == 0 || p->name.rfind("enc.sent.", 0) == 0) {
      out.push_back(p->name);
    }
  }
  return out;
}

void ExtModel::Initialize() {
  Rng rng(config_.seed);
  for (auto& p : params_.all()) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      p->value(i) = rng.Uniform(-config_.init_scale, config_.init_scale);
    }
    p->grad.setZero(p->value.rows(), p->value.cols());
  }
}

// ---- Graph builders ------------------------------------------------------------------

Expr ExtModel::BuildFused(Graph& g, std::span<const int> token_ids, Expr aspect) const {
  const Param& word = params_.Get("embed.word");
  std::vector<Expr> cols;
  cols.reserve(token_ids.size());
  for (int id : token_ids) {
    if (id < 0 || id >= config_.vocab_size) {
      throw std::out_of_range("token id " + std::to_string(id) + " outside the vocabulary");
    }
    cols.push_back(g.Lookup(word, id));
  }
  return g.AddBiasCols(g.ConcatCols(cols), aspect);
}

namespace {

struct GruParams {
  const Param* W;
  const Param* b;
  const Param* U;
  const Param* bh;
};

GruParams GetGru(const ParameterStore& ps, const std::string& prefix) {
  return {&ps.Get(prefix + ".W"), &ps.Get(prefix + ".b"), &ps.Get(prefix + ".U"),
          &ps.Get(prefix + ".bh")};
}

// Runs a GRU over the columns of `inputs`; returns one state per column,
// in input order.
std::vector<Expr> RunGru(Graph& g, const GruParams& p, Expr inputs, bool reverse) {
  const Eigen::Index n = g.value(inputs).cols();
  const Eigen::Index hidden = p.U->value.cols();
  Expr proj = g.AddBiasCols(g.MatMul(g.Parameter(*p.W), inputs), g.Parameter(*p.b));
  Expr U = g.Parameter(*p.U);
  Expr bh = g.Parameter(*p.bh);
  Expr h = g.Constant(Mat::Zero(hidden, 1));
  std::vector<Expr> states(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index t = reverse ? n - 1 - k : k;
    h = g.Gru(g.Col(proj, t), h, U, bh);
    states[static_cast<std::size_t>(t)] = h;
  }
  return states;
}

Expr BiGru(Graph& g, const GruParams& fwd, const GruParams& bwd, Expr inputs) {
  const auto f = RunGru(g, fwd, inputs, false);
  const auto b = RunGru(g, bwd, inputs, true);
  const std::array<Expr, 2> parts{g.ConcatCols(f), g.ConcatCols(b)};
  return g.ConcatRows(parts);
}

}  // namespace

std::pair<Expr, Expr> ExtModel::BuildEncoder(Graph& g, Expr fused,
                                             const SentenceBoundaries& boundaries) const {
  const auto n_words = static_cast<int>(g.value(fused).cols());
  if (static_cast<int>(boundaries.sentence_map.size()) != n_words ||
      boundaries.period_indices.empty() || boundaries.period_indices.back() != n_words - 1) {
    throw std::invalid_argument("sentence boundaries do not match the token sequence");
  }
  const int h = config_.hidden_dim;
  Expr word_reps, sentence_reps;
  if (config_.encoder_kind == EncoderKind::kRecurrent) {
    word_reps = BiGru(g, GetGru(params_, "enc.word.fwd"), GetGru(params_, "enc.word.bwd"), fused);
    if (config_.use_extractor) {
      std::vector<Expr> pooled;
      int start = 0;
      for (int end : boundaries.period_indices) {
        pooled.push_back(g.MeanCols(word_reps, start, end - start + 1));
        start = end + 1;
      }
      sentence_reps = BiGru(g, GetGru(params_, "enc.sent.fwd"), GetGru(params_, "enc.sent.bwd"),
                            g.ConcatCols(pooled));
    }
  } else {
    if (n_words > positions_.cols()) {
      throw std::invalid_argument("input longer than max_input_chars");
    }
    auto P = [&](const char* name) { return g.Parameter(params_.Get(name)); };
    Expr z0 = g.AddBiasCols(g.MatMul(P("enc.in.W"), fused), P("enc.in.b"));
    if (config_.use_positions) z0 = g.Add(z0, g.Constant(positions_.leftCols(n_words)));
    Expr q = g.MatMul(P("enc.attn.Wq"), z0);
    Expr k = g.MatMul(P("enc.attn.Wk"), z0);
    Expr v = g.MatMul(P("enc.attn.Wv"), z0);
    // Column i of the weights is query i's distribution over keys.
    Expr weights = g.SoftmaxCols(g.Scale(g.MatMulTN(k, q), 1.0 / std::sqrt(double(h))));
    Expr z1 = g.Add(z0, g.MatMul(P("enc.attn.Wo"), g.MatMul(v, weights)));
    Expr ffn = g.AddBiasCols(
        g.MatMul(P("enc.ffn.W2"), g.Tanh(g.AddBiasCols(g.MatMul(P("enc.ffn.W1"), z1),
                                                       P("enc.ffn.b1")))),
        P("enc.ffn.b2"));
    word_reps = g.Add(z1, ffn);
    std::vector<Expr> gathered;
    for (int idx : boundaries.period_indices) gathered.push_back(g.Col(word_reps, idx));
    sentence_reps = g.ConcatCols(gathered);
  }
  return {word_reps, sentence_reps};
}

Expr ExtModel::BuildExtractor(Graph& g, Expr sentence_reps, Expr aspect) const {
  if (config_.extractor_head == ExtractorHead::kBilinear) {
    return g.Sigmoid(g.MatMulTN(sentence_reps, aspect));
  }
  auto P = [&](const char* name) { return g.Parameter(params_.Get(name)); };
  Expr hidden = g.Tanh(g.AddBiasCols(g.MatMul(P("ext.ffn.W1"), sentence_reps), P("ext.ffn.b1")));
  Expr logits = g.AddBiasCols(g.MatMul(P("ext.ffn.W2"), hidden), P("ext.ffn.b2"));
  return g.Sigmoid(g.Transpose(logits));
}

ExtModel::Encoded ExtModel::BuildEncoded(Graph& g, const SourceInput& source,
                                         int aspect) const {
  if (aspect < 0 || aspect > config_.num_aspects) {
    throw std::out_of_range("aspect index " + std::to_string(aspect) + " out of range");
  }
  Encoded enc;
  enc.aspect = g.Lookup(params_.Get("embed.aspect"), aspect);
  Expr fused = BuildFused(g, source.token_ids, enc.aspect);
  std::tie(enc.word_reps, enc.sentence_reps) = BuildEncoder(g, fused, source.boundaries);
  if (config_.use_extractor) enc.scores = BuildExtractor(g, enc.sentence_reps, enc.aspect);
  enc.attention_keys = g.MatMul(g.Parameter(params_.Get("dec.attn.Wk")), enc.word_reps);
  const auto n = g.value(enc.word_reps).cols();
  enc.init_state = g.Tanh(g.Add(g.MatMul(g.Parameter(params_.Get("dec.init.W")),
                                         g.MeanCols(enc.word_reps, 0, n)),
                                g.Parameter(params_.Get("dec.init.b"))));
  return enc;
}

ExtModel::DecoderState ExtModel::InitialState(Graph& g, const Encoded& enc) const {
  return {enc.init_state, g.Constant(Mat::Zero(config_.hidden_dim, 1))};
}

ExtModel::Step ExtModel::BuildStep(Graph& g, const Encoded& enc, const SourceInput& source,
                                   int prev_token, const DecoderState& state) const {
  auto P = [&](const char* name) { return g.Parameter(params_.Get(name)); };
  const int base = prev_token >= 0 && prev_token < config_.vocab_size ? prev_token
                                                                       : Vocabulary::kUnk;
  Expr input = g.Add(g.Lookup(params_.Get("embed.word"), base), enc.aspect);
  const std::array<Expr, 2> x_parts{input, state.context};
  Expr x = g.ConcatRows(x_parts);
  Expr wx = g.Add(g.MatMul(P("dec.gru.W"), x), P("dec.gru.b"));
  Expr s = g.Gru(wx, state.hidden, P("dec.gru.U"), P("dec.gru.bh"));

  Expr q = g.Add(g.MatMul(P("dec.attn.Wq"), s), P("dec.attn.b"));
  Expr e = g.MatMulTN(g.Tanh(g.AddBiasCols(enc.attention_keys, q)), P("dec.attn.v"));
  Step step;
  step.word_attention = g.Softmax(e);
  step.fused_attention =
      config_.use_extractor
          ? g.FuseAttention(step.word_attention, enc.scores, source.boundaries.sentence_map)
          : step.word_attention;
  Expr c = g.MatMul(enc.word_reps, step.fused_attention);

  const std::array<Expr, 2> out_parts{s, c};
  Expr o = g.Tanh(g.Add(g.MatMul(P("dec.out.W1"), g.ConcatRows(out_parts)), P("dec.out.b1")));
  step.vocab_distribution = g.Softmax(g.Add(g.MatMul(P("dec.out.W2"), o), P("dec.out.b2")));
  const std::array<Expr, 3> gate_parts{c, s, input};
  step.p_gen = g.Sigmoid(g.Add(g.MatMul(P("dec.gate.W"), g.ConcatRows(gate_parts)),
                               P("dec.gate.b")));

  const int ext_size = source.extended_size(config_.vocab_size);
  Expr pv = step.vocab_distribution;
  if (ext_size > config_.vocab_size) {
    const std::array<Expr, 2> pad{pv, g.Constant(Mat::Zero(ext_size - config_.vocab_size, 1))};
    pv = g.ConcatRows(pad);
  }
  Expr copy = g.ScatterAdd(step.fused_attention, source.extended_ids, ext_size);
  step.distribution =
      g.Add(g.ScaleBy(step.p_gen, pv), g.ScaleBy(g.OneMinus(step.p_gen), copy));
  step.next = {s, c};
  return step;
}

ExtModel::Losses ExtModel::BuildLoss(Graph& g, const SourceInput& source, int aspect,
                                     std::span<const int> target, std::span<const int> labels,
                                     double ext_weight) const {
  if (target.empty()) throw std::invalid_argument("empty target sequence");
  const int ext_size = source.extended_size(config_.vocab_size);
  Encoded enc = BuildEncoded(g, source, aspect);
  DecoderState state = InitialState(g, enc);
  std::vector<Expr> gold;
  gold.reserve(target.size());
  int prev = Vocabulary::kBos;
  for (int y : target) {
    if (y < 0 || y >= ext_size) throw std::out_of_range("target id outside extended vocabulary");
    Step step = BuildStep(g, enc, source, prev, state);
    gold.push_back(g.Pick(step.distribution, y));
    state = step.next;
    prev = y;
  }
  Losses out;
  out.target_length = static_cast<int>(target.size());
  out.gen = g.Scale(g.Sum(g.LogFloor(g.ConcatRows(gold), kProbabilityFloor)),
                    -1.0 / static_cast<double>(target.size()));
  out.total = out.gen;
  if (config_.use_extractor && !labels.empty()) {
    const auto n = g.value(enc.scores).rows();
    if (static_cast<Eigen::Index>(labels.size()) != n) {
      throw std::invalid_argument("got " + std::to_string(labels.size()) + " labels for " +
                                  std::to_string(n) + " sentences");
    }
    out.ext = g.BinaryCrossEntropy(enc.scores, labels);
    out.total = g.Add(g.Scale(out.ext, ext_weight), out.gen);
  }
  return out;
}

// ---- Value API -----------------------------------------------------------------------

FusedEmbedding ExtModel::EmbedFused(std::span<const int> token_ids, int aspect) const {
  if (aspect < 0 || aspect > config_.num_aspects) {
    throw std::out_of_range("aspect index " + std::to_string(aspect) + " out of range");
  }
  Graph g(false);
  Expr a = g.Lookup(params_.Get("embed.aspect"), aspect);
  Expr fused = BuildFused(g, token_ids, a);
  FusedEmbedding out;
  out.aspect_embedding = g.value(a).col(0);
  out.fused = g.value(fused);
  out.word_embeddings.resize(out.fused.rows(), out.fused.cols());
  const Param& word = params_.Get("embed.word");
  for (std::size_t m = 0; m < token_ids.size(); ++m) {
    out.word_embeddings.col(static_cast<Eigen::Index>(m)) = word.value.col(token_ids[m]);
  }
  return out;
}

EncoderOutputs ExtModel::Encode(const FusedEmbedding& fused,
                                const SentenceBoundaries& boundaries) const {
  Graph g(false);
  auto [words, sentences] = BuildEncoder(g, g.Constant(fused.fused), boundaries);
  EncoderOutputs out;
  out.word_reps = g.value(words);
  if (sentences.valid()) out.sentence_reps = g.value(sentences);
  out.period_indices = boundaries.period_indices;
  out.sentence_map = boundaries.sentence_map;
  return out;
}

Vec ExtModel::ExtractorScore(const Mat& sentence_reps, int aspect) const {
  if (!config_.use_extractor) throw std::logic_error("model has no extractor");
  Graph g(false);
  Expr a = g.Lookup(params_.Get("embed.aspect"), aspect);
  return g.value(BuildExtractor(g, g.Constant(sentence_reps), a)).col(0);
}

LossBundle ExtModel::ComputeLoss(const SourceInput& source, int aspect,
                                 std::span<const int> target, std::span<const int> labels,
                                 double ext_weight) const {
  Graph g(false);
  Losses l = BuildLoss(g, source, aspect, target, labels, ext_weight);
  LossBundle out;
  out.loss_gen = g.scalar(l.gen);
  out.loss_ext = l.ext.valid() ? g.scalar(l.ext) : 0.0;
  out.loss_total = g.scalar(l.total);
  out.target_length = l.target_length;
  return out;
}

}  // namespace extsum
