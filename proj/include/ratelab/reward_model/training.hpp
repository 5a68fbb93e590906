#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ratelab/nnet/adam.hpp"
#include "ratelab/reward_model/losses.hpp"
#include "ratelab/segments/rating.hpp"

namespace ratelab::reward {

struct RewardTrainingOptions {
  int max_epochs = 200;
  /// Segments per minibatch; batches larger than the dataset become
  /// full-batch.
  int batch_size = 32;
  nnet::AdamConfig optimizer{1e-3};
  /// Learning rate for u_cls / u_reg (same Adam constants otherwise).
  double uncertainty_learning_rate = 1e-3;
  bool early_stopping = false;
  /// Stop once the epoch loss has not improved by min_improvement over the
  /// best value for `patience` epochs.
  int patience = 10;
  double min_improvement = 1e-4;
  std::uint64_t seed = 0;
};

struct EpochReport {
  int epoch = 0;
  double ce = 0.0;
  double reg = 0.0;
  double total = 0.0;
  double log_lambda_cls = 0.0;
  double log_lambda_reg = 0.0;
  double accuracy = 0.0;
};

struct RewardTrainingReport {
  std::vector<EpochReport> epochs;
  bool aborted = false;
  bool early_stopped = false;
  std::string diagnostic;
  /// Boundaries fitted on the final predictions.
  segments::RatingBoundaries final_boundaries;
};

/// Adam state for the network and for the two log-uncertainties.
template <typename T>
class RewardOptimizer {
 public:
  RewardOptimizer(const RewardPredictor<T>& predictor,
                  const RewardTrainingOptions& options);

  nnet::Adam<T>& net() noexcept { return net_; }
  nnet::Adam<double>& uncertainty() noexcept { return uncertainty_; }

 private:
  nnet::Adam<T> net_;
  nnet::Adam<double> uncertainty_;
};

/// Sets the output bias so an otherwise-neutral net starts at the mean
/// per-step regression target instead of sigmoid(0) = 0.5, which would put
/// every segment return far above the targets and spend the first epochs
/// saturating the output. Returns the bias written.
template <typename T>
double initialize_output_bias(RewardPredictor<T>& predictor,
                              std::span<const TrainingExample> examples);

/// Shuffled minibatch Adam on the predictor's variant objective. Rating
/// boundaries are re-fitted from the current predictions at the start of
/// every epoch and held fixed within it. On a non-finite loss or a rejected
/// update training stops and the report is marked aborted.
template <typename T>
RewardTrainingReport train_reward_model(RewardPredictor<T>& predictor,
                                        std::span<const TrainingExample> examples,
                                        int n_classes,
                                        const RewardTrainingOptions& options,
                                        RewardOptimizer<T>& optimizer);

template <typename T>
RewardTrainingReport train_reward_model(RewardPredictor<T>& predictor,
                                        const segments::RatingDataset& dataset,
                                        const RewardTrainingOptions& options,
                                        RewardOptimizer<T>& optimizer);

extern template class RewardOptimizer<float>;
extern template class RewardOptimizer<double>;

}  // namespace ratelab::reward
