#include "ratelab/reward_model/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ratelab::reward {

double rating_target(int rating, int length, double alpha) {
  if (rating < 0) throw std::out_of_range("rating must be non-negative");
  return std::log1p(alpha * static_cast<double>(length) * rating);
}

std::vector<TrainingExample> make_training_examples(
    const segments::RatingDataset& dataset, double alpha) {
  std::vector<TrainingExample> out;
  out.reserve(dataset.size());
  for (const auto& ex : dataset.examples()) {
    out.push_back({&ex.segment, ex.rating,
                   rating_target(ex.rating, ex.segment.length(), alpha)});
  }
  return out;
}

std::vector<double> class_logits(double r_tilde,
                                 const segments::RatingBoundaries& boundaries,
                                 double kappa) {
  const int n = boundaries.n_classes();
  std::vector<double> logits(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double lo = boundaries.edges[static_cast<std::size_t>(i)];
    const double hi = boundaries.edges[static_cast<std::size_t>(i) + 1];
    logits[static_cast<std::size_t>(i)] = -kappa * (r_tilde - lo) * (r_tilde - hi);
  }
  return logits;
}

namespace {

// Returns log-sum-exp and fills probabilities.
double softmax(const std::vector<double>& logits, std::vector<double>& probs) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  probs.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - top);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return top + std::log(sum);
}

}  // namespace

std::vector<double> class_probabilities(
    double r_tilde, const segments::RatingBoundaries& boundaries, double kappa) {
  std::vector<double> probs;
  softmax(class_logits(r_tilde, boundaries, kappa), probs);
  return probs;
}

LossWeights loss_weights(LossVariant variant, double log_lambda_cls,
                         double log_lambda_reg) {
  LossWeights w;
  const double cls_uncertain = 0.5 * std::exp(-2.0 * log_lambda_cls);
  const double reg_uncertain = 0.5 * std::exp(-2.0 * log_lambda_reg);
  switch (variant) {
    case LossVariant::full:
      w.cls_weight = cls_uncertain;
      w.reg_weight = reg_uncertain;
      w.cls_offset = log_lambda_cls;
      w.reg_offset = log_lambda_reg;
      w.learns_cls = w.learns_reg = true;
      break;
    case LossVariant::equal:
      w.cls_weight = 0.5;
      w.reg_weight = 0.5;
      break;
    case LossVariant::cls_only:
      w.cls_weight = cls_uncertain;
      w.cls_offset = log_lambda_cls;
      w.learns_cls = true;
      break;
    case LossVariant::reg_only:
      w.reg_weight = reg_uncertain;
      w.reg_offset = log_lambda_reg;
      w.learns_reg = true;
      break;
    case LossVariant::rbrl:
      w.cls_weight = 1.0;
      break;
  }
  return w;
}

double combine_losses(LossVariant variant, double ce, double reg,
                      double log_lambda_cls, double log_lambda_reg) {
  const LossWeights w = loss_weights(variant, log_lambda_cls, log_lambda_reg);
  return w.cls_weight * ce + w.cls_offset + w.reg_weight * reg + w.reg_offset;
}

namespace {

template <typename T>
LossResult<T> evaluate(RewardPredictor<T>& predictor,
                       std::span<const TrainingExample> batch,
                       const segments::RatingBoundaries* boundaries,
                       double cls_weight, double reg_weight) {
  using Matrix = typename RewardPredictor<T>::Matrix;
  if (batch.empty()) throw std::invalid_argument("loss over an empty batch");

  Eigen::Index columns = 0;
  for (const auto& ex : batch) {
    if (ex.segment == nullptr) throw std::invalid_argument("example without segment");
    columns += ex.segment->length();
  }
  Matrix inputs(predictor.state_dim() + predictor.action_dim(), columns);
  Eigen::Index col = 0;
  for (const auto& ex : batch) {
    const auto len = ex.segment->length();
    inputs.middleCols(col, len) = predictor.segment_inputs(*ex.segment);
    col += len;
  }
  const Matrix& out = predictor.net().forward_train(inputs);

  const auto count = static_cast<double>(batch.size());
  LossResult<T> res;
  std::vector<double> d_r_hat(batch.size(), 0.0);
  std::vector<double> logits;
  std::vector<double> probs;
  col = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& ex = batch[b];
    const auto len = ex.segment->length();
    double r_hat = 0.0;
    for (Eigen::Index t = 0; t < len; ++t) r_hat += static_cast<double>(out(0, col + t));
    col += len;
    const double r_tilde = r_hat / static_cast<double>(len);
    res.r_hat.push_back(r_hat);
    res.r_tilde.push_back(r_tilde);

    if (boundaries != nullptr) {
      const double kappa = predictor.kappa();
      logits = class_logits(r_tilde, *boundaries, kappa);
      if (ex.label < 0 || ex.label >= static_cast<int>(logits.size())) {
        throw std::out_of_range("label outside the boundary classes");
      }
      const double lse = softmax(logits, probs);
      res.ce += (lse - logits[static_cast<std::size_t>(ex.label)]) / count;
      const auto best = std::max_element(probs.begin(), probs.end()) - probs.begin();
      if (best == ex.label) ++res.correct;
      // d CE / d R_tilde = sum_i (Q_i - mu_i) d logit_i / d R_tilde
      double d_tilde = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        const double lo = boundaries->edges[i];
        const double hi = boundaries->edges[i + 1];
        const double slope = -kappa * (2.0 * r_tilde - lo - hi);
        const double mu = static_cast<int>(i) == ex.label ? 1.0 : 0.0;
        d_tilde += (probs[i] - mu) * slope;
      }
      d_r_hat[b] += cls_weight * d_tilde / (count * static_cast<double>(len));
    }

    const double diff = r_hat - ex.regression_target;
    res.reg += diff * diff / count;
    d_r_hat[b] += reg_weight * 2.0 * diff / count;
  }

  Matrix out_grad(1, columns);
  col = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto len = batch[b].segment->length();
    out_grad.middleCols(col, len).setConstant(static_cast<T>(d_r_hat[b]));
    col += len;
  }
  res.net_grad = predictor.net().backward(out_grad).parameters;
  return res;
}

}  // namespace

template <typename T>
LossResult<T> loss_ce(RewardPredictor<T>& predictor,
                      std::span<const TrainingExample> batch,
                      const segments::RatingBoundaries& boundaries) {
  auto res = evaluate(predictor, batch, &boundaries, 1.0, 0.0);
  res.value = res.ce;
  return res;
}

template <typename T>
LossResult<T> loss_reg(RewardPredictor<T>& predictor,
                       std::span<const TrainingExample> batch) {
  auto res = evaluate<T>(predictor, batch, nullptr, 0.0, 1.0);
  res.value = res.reg;
  return res;
}

template <typename T>
LossResult<T> loss_for_variant(RewardPredictor<T>& predictor,
                               std::span<const TrainingExample> batch,
                               const segments::RatingBoundaries& boundaries,
                               LossVariant variant) {
  const double u_cls = predictor.log_lambda_cls();
  const double u_reg = predictor.log_lambda_reg();
  const LossWeights w = loss_weights(variant, u_cls, u_reg);
  auto res = evaluate(predictor, batch, &boundaries, w.cls_weight, w.reg_weight);
  res.value = combine_losses(variant, res.ce, res.reg, u_cls, u_reg);
  // d/du (e^{-2u}/2 L + u) = 1 - e^{-2u} L
  if (w.learns_cls) res.grad_log_lambda_cls = 1.0 - 2.0 * w.cls_weight * res.ce;
  if (w.learns_reg) res.grad_log_lambda_reg = 1.0 - 2.0 * w.reg_weight * res.reg;
  return res;
}

template <typename T>
LossResult<T> loss_total(RewardPredictor<T>& predictor,
                         std::span<const TrainingExample> batch,
                         const segments::RatingBoundaries& boundaries) {
  return loss_for_variant(predictor, batch, boundaries, predictor.variant());
}

template <typename T>
std::vector<double> normalized_returns(const RewardPredictor<T>& predictor,
                                       std::span<const TrainingExample> examples) {
  std::vector<double> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    out.push_back(predictor.predict_segment(*ex.segment).R_tilde);
  }
  return out;
}

#define RATELAB_INSTANTIATE(T)                                                \
  template LossResult<T> loss_ce(RewardPredictor<T>&,                         \
                                 std::span<const TrainingExample>,            \
                                 const segments::RatingBoundaries&);          \
  template LossResult<T> loss_reg(RewardPredictor<T>&,                        \
                                  std::span<const TrainingExample>);          \
  template LossResult<T> loss_for_variant(                                    \
      RewardPredictor<T>&, std::span<const TrainingExample>,                  \
      const segments::RatingBoundaries&, LossVariant);                        \
  template LossResult<T> loss_total(RewardPredictor<T>&,                      \
                                    std::span<const TrainingExample>,         \
                                    const segments::RatingBoundaries&);       \
  template std::vector<double> normalized_returns(                            \
      const RewardPredictor<T>&, std::span<const TrainingExample>);

RATELAB_INSTANTIATE(float)
RATELAB_INSTANTIATE(double)

#undef RATELAB_INSTANTIATE

}  // namespace ratelab::reward
