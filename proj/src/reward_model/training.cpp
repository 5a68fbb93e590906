#include "ratelab/reward_model/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ratelab/common/random.hpp"

namespace ratelab::reward {

template <typename T>
RewardOptimizer<T>::RewardOptimizer(const RewardPredictor<T>& predictor,
                                    const RewardTrainingOptions& options)
    : net_(static_cast<Eigen::Index>(predictor.net().parameter_count()),
           options.optimizer),
      uncertainty_(2, [&] {
        nnet::AdamConfig c = options.optimizer;
        c.learning_rate = options.uncertainty_learning_rate;
        return c;
      }()) {}

namespace {

std::vector<int> labels_of(std::span<const TrainingExample> examples) {
  std::vector<int> labels;
  labels.reserve(examples.size());
  for (const auto& ex : examples) labels.push_back(ex.label);
  return labels;
}

}  // namespace

template <typename T>
double initialize_output_bias(RewardPredictor<T>& predictor,
                              std::span<const TrainingExample> examples) {
  if (examples.empty()) throw std::invalid_argument("output bias needs examples");
  double mean = 0.0;
  for (const auto& ex : examples) {
    mean += ex.regression_target / ex.segment->length();
  }
  mean = std::clamp(mean / static_cast<double>(examples.size()), 1e-3, 0.5);
  const double bias = std::log(mean / (1.0 - mean));
  auto& net = predictor.net();
  net.bias(net.layer_count() - 1).setConstant(static_cast<T>(bias));
  return bias;
}

template <typename T>
RewardTrainingReport train_reward_model(RewardPredictor<T>& predictor,
                                        std::span<const TrainingExample> examples,
                                        int n_classes,
                                        const RewardTrainingOptions& options,
                                        RewardOptimizer<T>& optimizer) {
  if (examples.empty()) {
    throw std::invalid_argument("reward training needs at least one example");
  }
  if (options.batch_size <= 0) throw std::invalid_argument("batch size must be positive");

  RewardTrainingReport report;
  const std::vector<int> labels = labels_of(examples);
  const std::size_t batch =
      std::min<std::size_t>(static_cast<std::size_t>(options.batch_size), examples.size());
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<TrainingExample> minibatch;
  minibatch.reserve(batch);

  const LossWeights probe = loss_weights(predictor.variant(), 0.0, 0.0);
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    const auto boundaries = segments::estimate_boundaries(
        labels, normalized_returns(predictor, examples), n_classes);
    Rng rng = make_rng(options.seed, static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    EpochReport rec;
    rec.epoch = epoch;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      minibatch.clear();
      for (std::size_t i = start; i < stop; ++i) minibatch.push_back(examples[order[i]]);

      auto res = loss_total(predictor, std::span<const TrainingExample>(minibatch),
                            boundaries);
      if (!std::isfinite(res.value) || !res.net_grad.allFinite()) {
        report.aborted = true;
        report.diagnostic = "non-finite reward loss at epoch " + std::to_string(epoch) +
                            " (ce=" + std::to_string(res.ce) +
                            ", reg=" + std::to_string(res.reg) +
                            ", u_cls=" + std::to_string(predictor.log_lambda_cls()) +
                            ", u_reg=" + std::to_string(predictor.log_lambda_reg()) + ")";
        report.final_boundaries = boundaries;
        return report;
      }
      const double share = static_cast<double>(minibatch.size()) / order.size();
      rec.ce += res.ce * share;
      rec.reg += res.reg * share;
      rec.total += res.value * share;
      correct += res.correct;

      const auto status =
          optimizer.net().step(predictor.net().mutable_parameters(), res.net_grad);
      if (status != nnet::StepStatus::applied) {
        report.aborted = true;
        report.diagnostic = "reward net update " + std::string(nnet::to_string(status)) +
                            " at epoch " + std::to_string(epoch);
        report.final_boundaries = boundaries;
        return report;
      }
      if (probe.learns_cls || probe.learns_reg) {
        Eigen::VectorXd u(2);
        u << predictor.log_lambda_cls(), predictor.log_lambda_reg();
        Eigen::VectorXd g(2);
        g << res.grad_log_lambda_cls, res.grad_log_lambda_reg;
        if (optimizer.uncertainty().step(u, g) == nnet::StepStatus::applied) {
          if (probe.learns_cls) predictor.set_log_lambda_cls(u(0));
          if (probe.learns_reg) predictor.set_log_lambda_reg(u(1));
        }
      }
    }
    rec.accuracy = static_cast<double>(correct) / order.size();
    rec.log_lambda_cls = predictor.log_lambda_cls();
    rec.log_lambda_reg = predictor.log_lambda_reg();
    report.epochs.push_back(rec);

    if (rec.total < best - options.min_improvement) {
      best = rec.total;
      best_epoch = epoch;
    } else if (options.early_stopping && epoch - best_epoch >= options.patience) {
      report.early_stopped = true;
      break;
    }
  }

  report.final_boundaries = segments::estimate_boundaries(
      labels, normalized_returns(predictor, examples), n_classes);
  predictor.set_boundaries(report.final_boundaries);
  return report;
}

template <typename T>
RewardTrainingReport train_reward_model(RewardPredictor<T>& predictor,
                                        const segments::RatingDataset& dataset,
                                        const RewardTrainingOptions& options,
                                        RewardOptimizer<T>& optimizer) {
  const auto examples = make_training_examples(dataset, predictor.alpha());
  return train_reward_model(predictor, std::span<const TrainingExample>(examples),
                            dataset.n_classes(), options, optimizer);
}

template class RewardOptimizer<float>;
template class RewardOptimizer<double>;

#define RATELAB_INSTANTIATE(T)                                                   \
  template double initialize_output_bias(RewardPredictor<T>&,                   \
                                         std::span<const TrainingExample>);     \
  template RewardTrainingReport train_reward_model(                             \
      RewardPredictor<T>&, std::span<const TrainingExample>, int,               \
      const RewardTrainingOptions&, RewardOptimizer<T>&);                       \
  template RewardTrainingReport train_reward_model(                             \
      RewardPredictor<T>&, const segments::RatingDataset&,                      \
      const RewardTrainingOptions&, RewardOptimizer<T>&);

RATELAB_INSTANTIATE(float)
RATELAB_INSTANTIATE(double)

#undef RATELAB_INSTANTIATE

}  // namespace ratelab::reward
