#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "extsum/model.hpp"
#include "test_util.hpp"

namespace extsum {
namespace {

using testing::TempDir;
using testing::TinyInstances;
using testing::TinyModel;

TEST(Vocabulary, SpecialsSeparatorThenFirstSeen) {
  const auto v = Vocabulary::Build(TinyInstances());
  EXPECT_EQ(v.Token(0), "<unk>");
  EXPECT_EQ(v.Token(1), "<bos>");
  EXPECT_EQ(v.Token(2), "<eos>");
  EXPECT_EQ(v.Token(3), ".");
  EXPECT_EQ(v.separator_id(), 3);
  EXPECT_EQ(v.Token(4), "a");
  EXPECT_EQ(v.Id(U'Q'), Vocabulary::kUnk);
  const auto round = Vocabulary::FromTokens(v.tokens());
  EXPECT_EQ(round.tokens(), v.tokens());
  EXPECT_EQ(round.Id(U'x'), v.Id(U'x'));
  EXPECT_THROW(Vocabulary::FromTokens({"a", "b"}), std::invalid_argument);
}

TEST(Boundaries, PeriodsAndSentenceMap) {
  const std::vector<int> ids = {5, 6, 3, 7, 3};
  const auto b = ComputeBoundaries(ids, 3);
  EXPECT_EQ(b.period_indices, (std::vector<int>{2, 4}));
  EXPECT_EQ(b.sentence_map, (std::vector<int>{0, 0, 0, 1, 1}));
  EXPECT_THROW(ComputeBoundaries(std::vector<int>{5, 3, 6}, 3), std::invalid_argument);
  EXPECT_THROW(ComputeBoundaries(std::vector<int>{}, 3), std::invalid_argument);
}

TEST(Source, OovTokensGetExtendedIds) {
  const auto v = Vocabulary::Build(TinyInstances());
  const auto src = PrepareSource({"aQ", "QR"}, v);
  const int V = v.size();
  EXPECT_EQ(src.token_ids,
            (std::vector<int>{v.Id(U'a'), Vocabulary::kUnk, 3, Vocabulary::kUnk,
                              Vocabulary::kUnk, 3}));
  EXPECT_EQ(src.extended_ids, (std::vector<int>{v.Id(U'a'), V, 3, V, V + 1, 3}));
  EXPECT_EQ(src.oov_tokens, (std::vector<std::string>{"Q", "R"}));
  EXPECT_EQ(src.extended_size(V), V + 2);

  const auto target = PrepareTarget("aRZ", v, src);
  EXPECT_EQ(target, (std::vector<int>{v.Id(U'a'), V + 1, Vocabulary::kUnk, Vocabulary::kEos}));
  EXPECT_EQ(DecodeTokens(target, v, src), "aR<unk>");
  EXPECT_THROW(PrepareSource({"a.b"}, v), std::invalid_argument);
  EXPECT_THROW(PrepareSource({}, v), std::invalid_argument);
}

TEST(Config, Validation) {
  ModelConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.hidden_dim = 16;
  EXPECT_THROW(c.Validate(), std::invalid_argument);  // bilinear needs d == h
  c.extractor_head = ExtractorHead::kFfn;
  EXPECT_NO_THROW(c.Validate());
  c.hidden_dim = 15;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c.encoder_kind = EncoderKind::kTransformer;
  EXPECT_NO_THROW(c.Validate());
  EXPECT_EQ(ParseExtractorHead("ffn"), ExtractorHead::kFfn);
  EXPECT_THROW(ParseEncoderKind("lstm"), std::invalid_argument);
}

TEST(Model, ParameterShapes) {
  const auto m = TinyModel();
  EXPECT_EQ(m.null_aspect(), 2);
  EXPECT_EQ(m.params().Get("embed.aspect").value.cols(), 3);
  EXPECT_EQ(m.params().Get("embed.word").value.cols(), m.vocab().size());
  EXPECT_EQ(m.params().Get("enc.word.fwd.U").value.rows(), 12);  // 3 gates x h/2
  EXPECT_TRUE(m.params().Contains("enc.sent.fwd.W"));
  const auto no_ext = TinyModel(ExtractorHead::kBilinear, EncoderKind::kRecurrent, false);
  EXPECT_FALSE(no_ext.params().Contains("enc.sent.fwd.W"));
  EXPECT_TRUE(no_ext.ExtractorOnlyParams().empty());
  const auto ffn = TinyModel(ExtractorHead::kFfn, EncoderKind::kTransformer);
  EXPECT_EQ(ffn.ExtractorOnlyParams(),
            (std::vector<std::string>{"ext.ffn.W1", "ext.ffn.b1", "ext.ffn.W2", "ext.ffn.b2"}));
}

TEST(Model, FusedEmbeddingIsWordPlusAspect) {
  const auto m = TinyModel();
  const auto src = PrepareSource({"abc", "dxe"}, m.vocab());
  const auto fused = m.EmbedFused(src.token_ids, 1);
  const Mat& W = m.params().Get("embed.word").value;
  const Mat& A = m.params().Get("embed.aspect").value;
  for (std::size_t k = 0; k < src.token_ids.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    EXPECT_EQ(fused.word_embeddings.col(col), W.col(src.token_ids[k]));
    EXPECT_LT((fused.fused.col(col) - (W.col(src.token_ids[k]) + A.col(1))).norm(), 1e-15);
  }
  EXPECT_EQ(fused.aspect_embedding, A.col(1));
}

TEST(Model, BilinearHeadIsSigmoidOfDot) {
  const auto m = TinyModel();
  const auto src = PrepareSource({"abc", "dxe", "fgh"}, m.vocab());
  const auto enc = m.Encode(m.EmbedFused(src.token_ids, 0), src.boundaries);
  ASSERT_EQ(enc.sentence_reps.cols(), 3);
  const Vec scores = m.ExtractorScore(enc.sentence_reps, 0);
  const Vec a = m.params().Get("embed.aspect").value.col(0);
  for (int i = 0; i < 3; ++i) {
    const double expected = 1.0 / (1.0 + std::exp(-enc.sentence_reps.col(i).dot(a)));
    EXPECT_NEAR(scores[i], expected, 1e-15);
  }
}

TEST(Model, FfnHeadMatchesManualComputation) {
  const auto m = TinyModel(ExtractorHead::kFfn);
  const auto src = PrepareSource({"abc", "dxe"}, m.vocab());
  const auto enc = m.Encode(m.EmbedFused(src.token_ids, 1), src.boundaries);
  const Vec scores = m.ExtractorScore(enc.sentence_reps, 1);
  const auto& P = m.params();
  for (int i = 0; i < 2; ++i) {
    const Vec hidden = (P.Get("ext.ffn.W1").value * enc.sentence_reps.col(i) +
                        P.Get("ext.ffn.b1").value.col(0))
                           .array()
                           .tanh()
                           .matrix();
    const double logit = (P.Get("ext.ffn.W2").value * hidden)(0) + P.Get("ext.ffn.b2").value(0);
    EXPECT_NEAR(scores[i], 1.0 / (1.0 + std::exp(-logit)), 1e-15);
  }
}

TEST(Model, TransformerSentenceRepsArePeriodStates) {
  const auto m = TinyModel(ExtractorHead::kBilinear, EncoderKind::kTransformer);
  const auto src = PrepareSource({"abc", "dxe", "fgh"}, m.vocab());
  const auto enc = m.Encode(m.EmbedFused(src.token_ids, 0), src.boundaries);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(enc.sentence_reps.col(i), enc.word_reps.col(src.boundaries.period_indices[i]));
  }
}

TEST(Model, RecurrentEncoderIsBidirectional) {
  // Changing the last character must change the first word state through the
  // backward direction only.
  const auto m = TinyModel();
  const auto a = PrepareSource({"abc", "dxe"}, m.vocab());
  const auto b = PrepareSource({"abc", "dxh"}, m.vocab());
  const auto ea = m.Encode(m.EmbedFused(a.token_ids, 0), a.boundaries);
  const auto eb = m.Encode(m.EmbedFused(b.token_ids, 0), b.boundaries);
  EXPECT_EQ(ea.word_reps.col(0).head(4), eb.word_reps.col(0).head(4));
  EXPECT_NE(ea.word_reps.col(0).tail(4), eb.word_reps.col(0).tail(4));
}

TEST(Model, StepDistributionIsCopyMixture) {
  for (bool use_extractor : {true, false}) {
    const auto m = TinyModel(ExtractorHead::kBilinear, EncoderKind::kRecurrent, use_extractor);
    const auto src = PrepareSource({"abQ", "dxe"}, m.vocab());
    Graph g(false);
    const auto enc = m.BuildEncoded(g, src, 0);
    const auto step = m.BuildStep(g, enc, src, Vocabulary::kBos, m.InitialState(g, enc));
    const Vec dist = g.value(step.distribution).col(0);
    EXPECT_EQ(dist.size(), m.vocab().size() + 1);
    EXPECT_NEAR(dist.sum(), 1.0, 1e-12);
    const Vec expected = MixCopyDistribution(
        g.value(step.vocab_distribution).col(0), g.scalar(step.p_gen),
        g.value(step.fused_attention).col(0), src.extended_ids, src.extended_size(m.vocab().size()));
    EXPECT_LT((dist - expected).cwiseAbs().maxCoeff(), 1e-15);
    if (use_extractor) {
      const Vec fused = FuseAttention(g.value(step.word_attention).col(0),
                                      g.value(enc.scores).col(0), src.boundaries.sentence_map);
      EXPECT_LT((g.value(step.fused_attention).col(0) - fused).cwiseAbs().maxCoeff(), 1e-15);
    } else {
      EXPECT_EQ(g.value(step.fused_attention), g.value(step.word_attention));
    }
  }
}

TEST(MixCopy, HandComputed) {
  Vec pv(3), attn(2);
  pv << 0.5, 0.3, 0.2;
  attn << 0.75, 0.25;
  const Vec out = MixCopyDistribution(pv, 0.6, attn, std::vector<int>{1, 3}, 4);
  EXPECT_NEAR(out[0], 0.3, 1e-15);
  EXPECT_NEAR(out[1], 0.18 + 0.3, 1e-15);
  EXPECT_NEAR(out[2], 0.12, 1e-15);
  EXPECT_NEAR(out[3], 0.1, 1e-15);
}

TEST(Model, LossComposition) {
  const auto m = TinyModel();
  const auto inst = TinyInstances()[0];
  const auto src = PrepareSource(inst.sentences, m.vocab());
  const auto tgt = PrepareTarget(inst.summary, m.vocab(), src);
  const auto& labels = inst.labels->labels;
  const auto full = m.ComputeLoss(src, 0, tgt, labels);
  EXPECT_NEAR(full.loss_total, full.loss_ext + full.loss_gen, 1e-14);
  EXPECT_EQ(full.target_length, 3);
  const auto no_ext = m.ComputeLoss(src, 0, tgt, labels, 0.0);
  EXPECT_EQ(no_ext.loss_total, no_ext.loss_gen);
  EXPECT_EQ(no_ext.loss_gen, full.loss_gen);
  const auto heavy = m.ComputeLoss(src, 0, tgt, labels, 2.5);
  EXPECT_NEAR(heavy.loss_total, 2.5 * full.loss_ext + full.loss_gen, 1e-14);
  EXPECT_THROW(m.ComputeLoss(src, 0, tgt, std::vector<int>{1}), std::invalid_argument);

  // Generation loss from explicit teacher-forced steps.
  Graph g(false);
  const auto enc = m.BuildEncoded(g, src, 0);
  auto state = m.InitialState(g, enc);
  int prev = Vocabulary::kBos;
  double nll = 0;
  for (int y : tgt) {
    const auto step = m.BuildStep(g, enc, src, prev, state);
    nll -= std::log(g.value(step.distribution)(y, 0));
    state = step.next;
    prev = y;
  }
  EXPECT_NEAR(full.loss_gen, nll / tgt.size(), 1e-13);
}

TEST(Model, NullAspectIsDistinct) {
  const auto m = TinyModel();
  const auto src = PrepareSource({"abc"}, m.vocab());
  const auto a = m.EmbedFused(src.token_ids, 0);
  const auto n = m.EmbedFused(src.token_ids, m.null_aspect());
  EXPECT_NE(a.fused, n.fused);
  EXPECT_THROW(m.EmbedFused(src.token_ids, 3), std::out_of_range);
}

TEST(Checkpoint, RoundTripPreservesModel) {
  TempDir dir("ckpt");
  for (auto kind : {EncoderKind::kRecurrent, EncoderKind::kTransformer}) {
    const auto m = TinyModel(ExtractorHead::kFfn, kind);
    SaveCheckpoint(m, dir / "m.ckpt");
    {
      std::ifstream in(dir / "m.ckpt");
      std::string magic;
      std::getline(in, magic);
      EXPECT_EQ(magic, "EXTSUMM-CKPT-v1");
    }
    const auto loaded = LoadCheckpoint(dir / "m.ckpt");
    EXPECT_EQ(loaded.vocab().tokens(), m.vocab().tokens());
    EXPECT_EQ(loaded.aspect_names(), m.aspect_names());
    EXPECT_EQ(loaded.config().encoder_kind, kind);
    ASSERT_EQ(loaded.params().all().size(), m.params().all().size());
    for (std::size_t i = 0; i < m.params().all().size(); ++i) {
      EXPECT_EQ(loaded.params().all()[i]->value, m.params().all()[i]->value);
    }
  }
}

TEST(Checkpoint, RejectsForeignFiles) {
  TempDir dir("ckpt");
  {
    std::ofstream out(dir / "bad.ckpt");
    out << "SOMETHING-ELSE\n{}\n";
  }
  EXPECT_THROW(LoadCheckpoint(dir / "bad.ckpt"), std::runtime_error);
  {
    std::ofstream out(dir / "trunc.ckpt");
    out << "EXTSUMM-CKPT-v1\n{\"config\":";
  }
  EXPECT_THROW(LoadCheckpoint(dir / "trunc.ckpt"), std::runtime_error);
  EXPECT_THROW(LoadCheckpoint(dir / "missing.ckpt"), std::runtime_error);
}

}  // namespace
}  // namespace extsum
