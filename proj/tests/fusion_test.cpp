#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "extsum/fusion.hpp"

namespace extsum {
namespace {

TEST(FuseAttention, WorkedExample) {
  // Two words in two sentences, alpha uniform, beta = (0.8, 0.2).
  Eigen::VectorXd alpha(2), beta(2);
  alpha << 0.5, 0.5;
  beta << 0.8, 0.2;
  const std::vector<int> map = {0, 1};
  const auto fused = FuseAttention(alpha, beta, map);
  EXPECT_EQ(fused[0], 0.8);
  EXPECT_EQ(fused[1], 0.2);
}

TEST(FuseAttention, MatchesDirectFormula) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int words = 1 + trial % 9;
    const int sentences = 1 + trial % 4;
    Eigen::VectorXd alpha(words), beta(sentences);
    std::vector<int> map(words);
    for (int m = 0; m < words; ++m) {
      alpha[m] = u(rng);
      map[m] = std::min(sentences - 1, m * sentences / words);
    }
    alpha /= alpha.sum();
    for (int i = 0; i < sentences; ++i) beta[i] = u(rng);
    const auto fused = FuseAttention(alpha, beta, map);
    double z = 0.0;
    for (int m = 0; m < words; ++m) z += alpha[m] * beta[map[m]];
    for (int m = 0; m < words; ++m) {
      EXPECT_NEAR(fused[m], alpha[m] * beta[map[m]] / z, 1e-15);
    }
    EXPECT_NEAR(fused.sum(), 1.0, 1e-12);
  }
}

TEST(FuseAttention, UniformBetaIsIdentity) {
  Eigen::VectorXd alpha(4), beta(2);
  alpha << 0.1, 0.2, 0.3, 0.4;
  beta << 0.37, 0.37;
  const auto fused = FuseAttention(alpha, beta, std::vector<int>{0, 0, 1, 1});
  EXPECT_LT((fused - alpha).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FuseAttention, DegenerateNormaliserFallsBackToAlpha) {
  Eigen::VectorXd alpha(2), beta(2);
  alpha << 0.25, 0.75;
  beta << 0.0, 0.0;
  const auto fused = FuseAttention(alpha, beta, std::vector<int>{0, 1});
  EXPECT_EQ(fused, alpha);
}

TEST(FuseAttention, ValidatesShapes) {
  Eigen::VectorXd alpha(2), beta(1);
  alpha << 0.5, 0.5;
  beta << 1.0;
  EXPECT_THROW(FuseAttention(alpha, beta, std::vector<int>{0}), std::invalid_argument);
  EXPECT_THROW(FuseAttention(alpha, beta, std::vector<int>{0, 1}), std::invalid_argument);
}

TEST(ContextVector, WeightedColumnSum) {
  Eigen::MatrixXd reps(2, 3);
  reps << 1, 2, 3, 4, 5, 6;
  Eigen::VectorXd attn(3);
  attn << 0.5, 0.25, 0.25;
  const auto c = ContextVector(attn, reps);
  EXPECT_DOUBLE_EQ(c[0], 0.5 * 1 + 0.25 * 2 + 0.25 * 3);
  EXPECT_DOUBLE_EQ(c[1], 0.5 * 4 + 0.25 * 5 + 0.25 * 6);
}

TEST(Losses, BinaryCrossEntropyMean) {
  const std::vector<double> scores = {0.9, 0.2, 0.6};
  const std::vector<int> labels = {1, 0, 0};
  const double expected = -(std::log(0.9) + std::log(0.8) + std::log(0.4)) / 3.0;
  EXPECT_NEAR(LossExt(scores, labels), expected, 1e-15);
  EXPECT_THROW(LossExt(scores, std::vector<int>{1}), std::invalid_argument);
}

TEST(Losses, ClipsSaturatedScores) {
  const std::vector<double> scores = {0.0, 1.0};
  const std::vector<int> labels = {1, 0};
  EXPECT_NEAR(LossExt(scores, labels), -std::log(kScoreClip), 1e-9);
}

TEST(Losses, GenerationNllAndTotal) {
  const std::vector<double> p = {0.5, 0.25};
  EXPECT_NEAR(LossGen(p), (std::log(2.0) + std::log(4.0)) / 2.0, 1e-15);
  EXPECT_NEAR(LossGen(std::vector<double>{0.0}), -std::log(kProbabilityFloor), 1e-9);
  EXPECT_DOUBLE_EQ(LossTotal(0.3, 1.2), 1.5);
  EXPECT_DOUBLE_EQ(LossTotal(0.3, 1.2, 0.0), 1.2);
  EXPECT_DOUBLE_EQ(LossTotal(0.3, 1.2, 2.0), 1.8);
}

}  // namespace
}  // namespace extsum
