#ifndef EXTSUM_FUSION_HPP
#define EXTSUM_FUSION_HPP

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace extsum {

// Below this the fused normaliser is treated as degenerate and the word
// attention is returned unchanged.
inline constexpr double kFusionEpsilon = 1e-12;
// Extractor scores are clipped to [kScoreClip, 1 - kScoreClip] inside the BCE.
inline constexpr double kScoreClip = 1e-7;
// Gold-token probabilities are floored before the log.
inline constexpr double kProbabilityFloor = 1e-12;

// Sentence-reweighted word attention:
//   fused[m] = alpha[m] * beta[map[m]] / sum_k alpha[k] * beta[map[k]]
Eigen::VectorXd FuseAttention(const Eigen::VectorXd& word_attention,
                              const Eigen::VectorXd& sentence_scores,
                              std::span<const int> sentence_map);

// sum_m attention[m] * word_reps.col(m); word_reps is hidden x |w|.
Eigen::VectorXd ContextVector(const Eigen::VectorXd& attention,
                              const Eigen::MatrixXd& word_reps);

// Mean binary cross-entropy of sentence scores against 0/1 labels.
// Throws std::invalid_argument on a length mismatch.
double LossExt(std::span<const double> scores, std::span<const int> labels);

// Mean negative log-likelihood of the gold-token probabilities, one per step.
double LossGen(std::span<const double> gold_probabilities);

// loss_ext_weight * loss_ext + loss_gen; weight 1 is the plain sum.
double LossTotal(double loss_ext, double loss_gen, double loss_ext_weight = 1.0);

struct LossBundle {
  double loss_ext = 0.0;
  double loss_gen = 0.0;
  double loss_total = 0.0;
  int target_length = 0;
};

}  // namespace extsum

#endif  // EXTSUM_FUSION_HPP
