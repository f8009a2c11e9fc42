#include "extsum/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace extsum {

Eigen::VectorXd FuseAttention(const Eigen::VectorXd& word_attention,
                              const Eigen::VectorXd& sentence_scores,
                              std::span<const int> sentence_map) {
  const auto n = word_attention.size();
  if (static_cast<std::size_t>(n) != sentence_map.size()) {
    throw std::invalid_argument("attention and sentence map differ in length");
  }
  Eigen::VectorXd fused(n);
  double z = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    const int s = sentence_map[m];
    if (s < 0 || s >= sentence_scores.size()) {
      throw std::invalid_argument("sentence map entry out of range");
    }
    fused[m] = word_attention[m] * sentence_scores[s];
    z += fused[m];
  }
  if (z < kFusionEpsilon) return word_attention;
  return fused / z;
}

Eigen::VectorXd ContextVector(const Eigen::VectorXd& attention,
                              const Eigen::MatrixXd& word_reps) {
  if (attention.size() != word_reps.cols()) {
    throw std::invalid_argument("attention length != number of word representations");
  }
  return word_reps * attention;
}

double LossExt(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("extractor loss: " + std::to_string(scores.size()) +
                                " scores vs " + std::to_string(labels.size()) +
                                " labels");
  }
  if (scores.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double b = std::clamp(scores[i], kScoreClip, 1.0 - kScoreClip);
    total += labels[i] ? std::log(b) : std::log(1.0 - b);
  }
  return -total / static_cast<double>(scores.size());
}

double LossGen(std::span<const double> gold_probabilities) {
  if (gold_probabilities.empty()) {
    throw std::invalid_argument("generation loss needs at least one target step");
  }
  double total = 0.0;
  for (double p : gold_probabilities) total += std::log(std::max(p, kProbabilityFloor));
  return -total / static_cast<double>(gold_probabilities.size());
}

double LossTotal(double loss_ext, double loss_gen, double loss_ext_weight) {
  return loss_ext_weight * loss_ext + loss_gen;
}

}  // namespace extsum
