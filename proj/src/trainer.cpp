#include "extsum/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "extsum/random.hpp"

namespace extsum {

void TrainConfig::Validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be > 0");
  if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  if (!(ext_weight >= 0.0)) throw std::invalid_argument("ext_weight must be >= 0");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (!(null_aspect_drop >= 0.0 && null_aspect_drop <= 1.0)) {
    throw std::invalid_argument("null_aspect_drop must lie in [0, 1]");
  }
}

PreparedInstance Prepare(const ExtModel& model, const Instance& instance) {
  PreparedInstance out;
  out.product_id = instance.product_id;
  out.aspect = model.AspectIndex(instance.aspect.name);
  out.source = PrepareSource(instance.sentences, model.vocab());
  out.target = PrepareTarget(instance.summary, model.vocab(), out.source);
  if (instance.labels) out.labels = instance.labels->labels;
  return out;
}

std::vector<PreparedInstance> Prepare(const ExtModel& model,
                                      const std::vector<Instance>& instances) {
  std::vector<PreparedInstance> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(Prepare(model, inst));
  return out;
}

StepLoss ComputeGradients(ExtModel& model, const std::vector<PreparedInstance>& batch,
                          double ext_weight, int aspect_override) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  model.params().ZeroGrad();
  const double inv = 1.0 / static_cast<double>(batch.size());
  StepLoss out;
  for (const auto& inst : batch) {
    const int aspect = aspect_override >= 0 ? aspect_override : inst.aspect;
    // Sentence labels describe the real aspect, so they are dropped with it.
    std::span<const int> labels;
    if (aspect == inst.aspect) labels = inst.labels;
    Graph g;
    const auto l = model.BuildLoss(g, inst.source, aspect, inst.target, labels, ext_weight);
    g.Backward(g.Scale(l.total, inv));
    out.loss += inv * g.scalar(l.total);
    out.loss_gen += inv * g.scalar(l.gen);
    if (l.ext.valid()) out.loss_ext += inv * g.scalar(l.ext);
  }
  return out;
}

double Perplexity(const ExtModel& model, const std::vector<PreparedInstance>& instances) {
  if (instances.empty()) throw std::invalid_argument("perplexity of an empty instance list");
  double nll = 0.0;
  double tokens = 0.0;
  for (const auto& inst : instances) {
    const auto l = model.ComputeLoss(inst.source, inst.aspect, inst.target, {});
    nll += l.loss_gen * l.target_length;
    tokens += l.target_length;
  }
  return std::exp(nll / tokens);
}

double Perplexity(const ExtModel& model, const std::vector<Instance>& instances) {
  return Perplexity(model, Prepare(model, instances));
}

namespace {

class Adam {
 public:
  Adam(const ParameterStore& params, double lr) : lr_(lr) {
    for (const auto& p : params.all()) {
      m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void Update(ParameterStore& params) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    auto& all = params.all();
    for (std::size_t i = 0; i < all.size(); ++i) {
      const Mat& g = all[i]->grad;
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g;
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g.cwiseProduct(g);
      all[i]->value.array() -=
          lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  int t_ = 0;
  std::vector<Mat> m_, v_;
};

std::vector<Mat> Snapshot(const ParameterStore& params) {
  std::vector<Mat> out;
  for (const auto& p : params.all()) out.push_back(p->value);
  return out;
}

void Restore(ParameterStore& params, const std::vector<Mat>& values) {
  auto& all = params.all();
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->value = values[i];
}

}  // namespace

TrainReport Train(ExtModel& model, const std::vector<Instance>& train,
                  const std::vector<Instance>& dev, const TrainConfig& config,
                  const TrainOptions& options) {
  config.Validate();
  if (train.empty()) throw std::invalid_argument("empty training set");
  auto log = [&](const std::string& line) {
    if (options.log) options.log(line);
  };

  const auto train_set = Prepare(model, train);
  const auto dev_set = Prepare(model, dev);
  Rng rng(config.seed);
  Adam adam(model.params(), config.learning_rate);
  TrainReport report;
  std::vector<Mat> best;

  auto evaluate = [&](int step) {
    if (dev_set.empty()) return;
    const double ppl = Perplexity(model, dev_set);
    report.dev_history.push_back({step, ppl});
    std::ostringstream msg;
    msg << "step " << step << " dev_ppl " << ppl;
    if (report.best_step < 0 || ppl < report.best_perplexity) {
      report.best_step = step;
      report.best_perplexity = ppl;
      best = Snapshot(model.params());
      report.best_checkpoint = "step-" + std::to_string(step);
      if (options.checkpoint_path) {
        SaveCheckpoint(model, *options.checkpoint_path);
        report.best_checkpoint = options.checkpoint_path->string();
      }
      msg << " best";
    }
    log(msg.str());
  };

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  int step = 0;
  bool done = false;
  for (int epoch = 0; epoch < config.epochs && !done; ++epoch) {
    rng.Shuffle(order);
    for (std::size_t start = 0; start < order.size() && !done; start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<PreparedInstance> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      int aspect_override = -1;
      if (config.null_aspect_baseline && rng.Unit() < config.null_aspect_drop) {
        aspect_override = model.null_aspect();
      }

      StepLoss loss = ComputeGradients(model, batch, config.ext_weight, aspect_override);
      ++step;
      loss.step = step;
      const double grad_norm = model.params().GradNorm();
      if (!std::isfinite(loss.loss) || !std::isfinite(grad_norm)) {
        std::ostringstream msg;
        msg << "non-finite loss at step " << step << " (epoch " << epoch << "): L=" << loss.loss
            << " L_ext=" << loss.loss_ext << " L_gen=" << loss.loss_gen
            << " grad_norm=" << grad_norm << "; batch products:";
        for (const auto& inst : batch) msg << ' ' << inst.product_id;
        throw TrainingError(msg.str());
      }
      if (grad_norm > config.clip_norm) {
        const double s = config.clip_norm / grad_norm;
        for (auto& p : model.params().all()) p->grad *= s;
      }
      adam.Update(model.params());
      report.steps.push_back(loss);

      done = config.max_steps > 0 && step >= config.max_steps;
      if (step % config.eval_every == 0) {
        std::ostringstream msg;
        msg << "step " << step << " loss " << loss.loss << " ext " << loss.loss_ext << " gen "
            << loss.loss_gen;
        log(msg.str());
        evaluate(step);
      }
    }
  }
  if (step % config.eval_every != 0) evaluate(step);

  if (!best.empty()) {
    Restore(model.params(), best);
  } else if (options.checkpoint_path) {
    SaveCheckpoint(model, *options.checkpoint_path);
    report.best_checkpoint = options.checkpoint_path->string();
  }
  return report;
}

GradientCheckResult GradientCheck(ExtModel& model, const std::vector<PreparedInstance>& batch,
                                  const GradientCheckOptions& options) {
  ComputeGradients(model, batch, options.ext_weight);
  auto mean_loss = [&] {
    double total = 0.0;
    for (const auto& inst : batch) {
      total += model.ComputeLoss(inst.source, inst.aspect, inst.target, inst.labels,
                                 options.ext_weight)
                   .loss_total;
    }
    return total / static_cast<double>(batch.size());
  };

  Rng rng(options.seed);
  GradientCheckResult result;
  for (auto& p : model.params().all()) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), p->name) == options.only.end()) {
      continue;
    }
    const Eigen::Index n = p->value.size();
    std::vector<Eigen::Index> picks(static_cast<std::size_t>(n));
    std::iota(picks.begin(), picks.end(), 0);
    if (n > options.samples_per_param) {
      rng.Shuffle(picks);
      picks.resize(static_cast<std::size_t>(options.samples_per_param));
      std::sort(picks.begin(), picks.end());
    }
    for (Eigen::Index idx : picks) {
      const double saved = p->value(idx);
      const double h = options.epsilon;
      const auto at = [&](double offset) {
        p->value(idx) = saved + offset;
        return mean_loss();
      };
      // Fourth-order central stencil.
      const double numeric = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
      p->value(idx) = saved;
      const double analytic = p->grad(idx);
      const double denom = std::max({std::abs(analytic), std::abs(numeric),
                                     options.denominator_floor});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.checked;
      result.max_relative_error = std::max(result.max_relative_error, rel);
      if (rel > options.tolerance) {
        result.failures.push_back({p->name, idx, analytic, numeric, rel});
      }
    }
  }
  return result;
}

}  // namespace extsum
