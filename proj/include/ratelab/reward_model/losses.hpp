#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ratelab/reward_model/reward_predictor.hpp"
#include "ratelab/segments/rating.hpp"

namespace ratelab::reward {

/// One supervised item for the reward losses: the segment, its class label
/// and the return the regression head is pulled toward. Built from a
/// RatingExample via make_training_examples(); test fixtures may set the
/// regression target independently of the label.
struct TrainingExample {
  const segments::Segment* segment = nullptr;
  int label = 0;
  double regression_target = 0.0;
};

/// log(1 + alpha * length * rating): the rating held constant over every
/// step of the segment and summed, then log1p-compressed.
double rating_target(int rating, int length, double alpha);

/// Examples refer into `dataset`, which must outlive them.
std::vector<TrainingExample> make_training_examples(
    const segments::RatingDataset& dataset, double alpha);

/// logit_i = -kappa (R_tilde - R_i)(R_tilde - R_{i+1}).
std::vector<double> class_logits(double r_tilde,
                                 const segments::RatingBoundaries& boundaries,
                                 double kappa);
/// Softmax of class_logits(), computed with max subtraction.
std::vector<double> class_probabilities(
    double r_tilde, const segments::RatingBoundaries& boundaries, double kappa);

/// Loss weights of a variant at log-uncertainties (u_cls, u_reg):
/// value = cls_weight * L_CE + cls_offset + reg_weight * L_reg + reg_offset.
struct LossWeights {
  double cls_weight = 0.0;
  double reg_weight = 0.0;
  /// Additive log-lambda regularizers (u itself, or 0).
  double cls_offset = 0.0;
  double reg_offset = 0.0;
  /// Whether u_cls / u_reg take part in the objective.
  bool learns_cls = false;
  bool learns_reg = false;
};

LossWeights loss_weights(LossVariant variant, double log_lambda_cls,
                         double log_lambda_reg);

/// Scalar objective of a variant given its component losses.
double combine_losses(LossVariant variant, double ce, double reg,
                      double log_lambda_cls, double log_lambda_reg);

template <typename T>
struct LossResult {
  /// The requested objective.
  double value = 0.0;
  /// Batch-mean cross-entropy and squared error (whichever were computed).
  double ce = 0.0;
  double reg = 0.0;
  /// d value / d net parameters (flat, net layout).
  Eigen::Matrix<T, Eigen::Dynamic, 1> net_grad;
  double grad_log_lambda_cls = 0.0;
  double grad_log_lambda_reg = 0.0;
  /// Examples whose most probable class equals the label.
  std::size_t correct = 0;
  std::vector<double> r_hat;
  std::vector<double> r_tilde;
};

/// Batch-mean cross-entropy of the rating classes.
template <typename T>
LossResult<T> loss_ce(RewardPredictor<T>& predictor,
                      std::span<const TrainingExample> batch,
                      const segments::RatingBoundaries& boundaries);

/// Batch-mean squared error between R_hat and the regression targets.
template <typename T>
LossResult<T> loss_reg(RewardPredictor<T>& predictor,
                       std::span<const TrainingExample> batch);

/// The predictor's variant objective, with gradients for the net and for
/// u_cls / u_reg. Boundaries are treated as constants.
template <typename T>
LossResult<T> loss_total(RewardPredictor<T>& predictor,
                         std::span<const TrainingExample> batch,
                         const segments::RatingBoundaries& boundaries);

/// Same objective under an explicit variant (the predictor's own variant is
/// ignored).
template <typename T>
LossResult<T> loss_for_variant(RewardPredictor<T>& predictor,
                               std::span<const TrainingExample> batch,
                               const segments::RatingBoundaries& boundaries,
                               LossVariant variant);

/// Normalized returns of every example under the current predictor.
template <typename T>
std::vector<double> normalized_returns(const RewardPredictor<T>& predictor,
                                       std::span<const TrainingExample> examples);

}  // namespace ratelab::reward
