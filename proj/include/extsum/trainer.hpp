#ifndef EXTSUM_TRAINER_HPP
#define EXTSUM_TRAINER_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "extsum/corpus.hpp"
#include "extsum/model.hpp"

namespace extsum {

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 1e-3;
  int batch_size = 20;
  double clip_norm = 2.0;
  // Dev perplexity is measured every eval_every optimiser steps and after
  // the last step.
  int eval_every = 50;
  std::uint64_t seed = 1;
  double ext_weight = 1.0;
  // Stop after this many optimiser steps (0 = no limit).
  int max_steps = 0;
  // Replace the aspect by the null aspect on this fraction of batches.
  // Only used when null_aspect_baseline is set.
  bool null_aspect_baseline = false;
  double null_aspect_drop = 0.1;

  void Validate() const;
};

struct StepLoss {
  int step = 0;
  double loss = 0.0;
  double loss_ext = 0.0;
  double loss_gen = 0.0;
};

struct DevEvaluation {
  int step = 0;
  double perplexity = 0.0;
};

struct TrainReport {
  std::vector<StepLoss> steps;
  std::vector<DevEvaluation> dev_history;
  // Step of the evaluation with minimal dev perplexity; -1 without a dev set.
  int best_step = -1;
  double best_perplexity = 0.0;
  std::string best_checkpoint;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One training example with everything the graph needs precomputed.
struct PreparedInstance {
  std::string product_id;
  int aspect = 0;
  SourceInput source;
  std::vector<int> target;
  std::vector<int> labels;  // empty when unlabeled
};

PreparedInstance Prepare(const ExtModel& model, const Instance& instance);
std::vector<PreparedInstance> Prepare(const ExtModel& model,
                                      const std::vector<Instance>& instances);

struct TrainOptions {
  // When set, the best model (by dev perplexity) is written here.
  std::optional<std::filesystem::path> checkpoint_path;
  // Line-oriented progress log; may be null.
  std::function<void(const std::string&)> log;
};

// Teacher-forced joint training with Adam and gradient-norm clipping. On
// return the model holds the parameters of the best dev evaluation (or the
// final parameters when `dev` is empty). Throws TrainingError on a
// non-finite loss.
TrainReport Train(ExtModel& model, const std::vector<Instance>& train,
                  const std::vector<Instance>& dev, const TrainConfig& config,
                  const TrainOptions& options = {});

// exp(total gold-token NLL / total target tokens) under teacher forcing.
double Perplexity(const ExtModel& model, const std::vector<Instance>& instances);
double Perplexity(const ExtModel& model, const std::vector<PreparedInstance>& instances);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  struct Entry {
    std::string param;
    Eigen::Index index;
    double analytic;
    double numeric;
    double relative_error;
  };
  // Entries whose relative error exceeded the tolerance.
  std::vector<Entry> failures;
};

struct GradientCheckOptions {
  double epsilon = 1e-4;
  double tolerance = 1e-4;
  // Lower bound on the relative-error denominator.
  double denominator_floor = 1e-6;
  // Entries sampled per parameter tensor (all entries if the tensor is smaller).
  int samples_per_param = 12;
  std::uint64_t seed = 7;
  double ext_weight = 1.0;
  // Restrict to these parameter names (all when empty).
  std::vector<std::string> only;
};

// Fourth-order central differences of the batch-mean loss against the analytic
// gradient. Relative error is |a - n| / max(|a|, |n|, denominator_floor).
GradientCheckResult GradientCheck(ExtModel& model,
                                  const std::vector<PreparedInstance>& batch,
                                  const GradientCheckOptions& options = {});

// Accumulates d(mean batch loss)/d(params) into the parameter gradients
// (which are zeroed first) and returns the mean losses.
StepLoss ComputeGradients(ExtModel& model, const std::vector<PreparedInstance>& batch,
                          double ext_weight, int aspect_override = -1);

}  // namespace extsum

#endif  // EXTSUM_TRAINER_HPP
