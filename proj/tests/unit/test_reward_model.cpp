#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numeric>

#include "ratelab/common/errors.hpp"
#include "ratelab/reward_model/checkpoint.hpp"
#include "ratelab/reward_model/losses.hpp"
#include "ratelab/reward_model/reward_predictor.hpp"
#include "ratelab/reward_model/training.hpp"
#include "ratelab/segments/boundaries.hpp"
#include "test_support.hpp"

using namespace ratelab;
using namespace ratelab::reward;

namespace {

constexpr int kState = 3;
constexpr int kAction = 1;

struct Fixture {
  std::vector<segments::Segment> segments;
  std::vector<TrainingExample> examples;
};

Fixture random_fixture(int count, int length, int n_classes, Rng& rng, double alpha = 0.5) {
  Fixture f;
  f.segments.reserve(static_cast<std::size_t>(count));
  std::uniform_int_distribution<int> cls(0, n_classes - 1);
  for (int i = 0; i < count; ++i) {
    segments::Segment s;
    s.segment_id = static_cast<std::uint64_t>(i);
    s.states = test::random_matrix(length, kState, rng);
    s.actions = test::random_matrix(length, kAction, rng);
    s.step_rewards.assign(static_cast<std::size_t>(length), 0.0);
    f.segments.push_back(std::move(s));
  }
  for (const auto& s : f.segments) {
    const int label = cls(rng);
    f.examples.push_back({&s, label, rating_target(label, length, alpha)});
  }
  return f;
}

RewardModelConfig small_config(LossVariant variant = LossVariant::full) {
  RewardModelConfig c;
  c.hidden_layers = {8, 8};
  c.variant = variant;
  return c;
}

// Independent forward pass: concat(state, action) per step through the net,
// summed over the segment.
double oracle_return(const RewardPredictor<double>& p, const segments::Segment& s) {
  double total = 0.0;
  for (int t = 0; t < s.length(); ++t) {
    Eigen::VectorXd x(kState + kAction);
    x << s.states.row(t).transpose(), s.actions.row(t).transpose();
    total += p.net().forward(x)(0);
  }
  return total;
}

struct OracleLoss {
  double ce = 0.0;
  double reg = 0.0;
};

OracleLoss oracle_losses(const RewardPredictor<double>& p, const std::vector<TrainingExample>& batch,
                         const segments::RatingBoundaries& b) {
  OracleLoss out;
  const double n = static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const double r_hat = oracle_return(p, *ex.segment);
    const double r_tilde = r_hat / ex.segment->length();
    std::vector<double> logits;
    for (int i = 0; i + 1 < static_cast<int>(b.edges.size()); ++i) {
      logits.push_back(-p.kappa() * (r_tilde - b.edges[i]) * (r_tilde - b.edges[i + 1]));
    }
    double z = 0.0;
    for (double l : logits) z += std::exp(l);
    out.ce += -std::log(std::exp(logits[static_cast<std::size_t>(ex.label)]) / z) / n;
    out.reg += (r_hat - ex.regression_target) * (r_hat - ex.regression_target) / n;
  }
  return out;
}

const LossVariant kVariants[] = {LossVariant::full, LossVariant::equal, LossVariant::cls_only,
                                 LossVariant::reg_only, LossVariant::rbrl};

}  // namespace

TEST_CASE("class probabilities for a two-class split") {
  const segments::RatingBoundaries b{{0.0, 0.5, 1.0}};
  const auto q = class_probabilities(0.2, b, 30.0);
  CHECK(q[0] == doctest::Approx(1.0 / (1.0 + std::exp(-9.0))).epsilon(1e-12));
  CHECK(q[0] == doctest::Approx(0.99988).epsilon(1e-5));
  const auto mid = class_probabilities(0.5, b, 30.0);
  CHECK(mid[0] == doctest::Approx(0.5));
  CHECK(mid[1] == doctest::Approx(0.5));
}

TEST_CASE("class probabilities are a distribution peaking inside the bucket") {
  const auto b = segments::uniform_boundaries(5);
  for (double r = 0.0; r <= 1.0; r += 0.01) {
    const auto q = class_probabilities(r, b, 30.0);
    CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const int centre = std::min(4, static_cast<int>(r * 5));
    const double mid = (centre + 0.5) / 5;
    if (std::abs(r - mid) < 0.05) {
      CHECK(std::max_element(q.begin(), q.end()) - q.begin() == centre);
    }
  }
  // huge logits must not overflow
  const auto far = class_probabilities(40.0, b, 30.0);
  CHECK(std::isfinite(far[4]));
  CHECK(far[4] == doctest::Approx(1.0));
}

TEST_CASE("rating target compresses the constant-rating return") {
  CHECK(rating_target(1, 8, 0.5) == doctest::Approx(std::log(5.0)).epsilon(1e-14));
  CHECK(rating_target(0, 50, 0.5) == 0.0);
  CHECK(rating_target(3, 50, 0.5) == doctest::Approx(std::log(76.0)).epsilon(1e-14));
}

TEST_CASE("cross-entropy of an even split is ln 2") {
  RewardModelConfig cfg = small_config(LossVariant::rbrl);
  Rng rng = make_rng(1);
  RewardPredictor<double> p(kState, kAction, cfg, rng);
  p.net().mutable_parameters().setZero();  // every step 0.5, so R_tilde = 0.5
  Fixture f = random_fixture(6, 4, 2, rng);
  const segments::RatingBoundaries b{{0.0, 0.5, 1.0}};
  const auto res = loss_ce(p, f.examples, b);
  CHECK(res.ce == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  for (double r : res.r_hat) CHECK(r == doctest::Approx(2.0));
}

TEST_CASE("zero-weight predictor outputs one half per step") {
  Rng rng = make_rng(2);
  RewardPredictor<double> p(kState, kAction, small_config(), rng);
  p.net().mutable_parameters().setZero();
  CHECK(p.step_reward(Eigen::VectorXd::Ones(kState), Eigen::VectorXd::Zero(kAction)) == 0.5);
  segments::Segment s;
  s.states = Eigen::MatrixXd::Zero(50, kState);
  s.actions = Eigen::MatrixXd::Zero(50, kAction);
  s.step_rewards.assign(50, 0.0);
  const auto pred = p.predict_segment(s);
  CHECK(pred.R_hat == doctest::Approx(25.0));
  CHECK(pred.R_tilde == doctest::Approx(0.5));
}

TEST_CASE("step rewards stay strictly inside the unit interval") {
  Rng rng = make_rng(3);
  RewardPredictor<double> p(kState, kAction, small_config(), rng);
  int outside = 0;
  for (int i = 0; i < 100000; ++i) {
    const double r = p.step_reward(test::random_vector(kState, rng, -5, 5),
                                   test::random_vector(kAction, rng, -1, 1));
    outside += !(r > 0.0 && r < 1.0);
  }
  CHECK(outside == 0);
  Fixture f = random_fixture(1, 7, 2, rng);
  const auto pred = p.predict_segment(f.segments[0]);
  for (int t = 0; t < 7; ++t) {
    CHECK(pred.per_step_rewards[static_cast<std::size_t>(t)] ==
          doctest::Approx(p.step_reward(f.segments[0].states.row(t).transpose(),
                                        f.segments[0].actions.row(t).transpose()))
              .epsilon(1e-12));
  }
  CHECK_THROWS_AS(p.step_reward(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1)),
                  DimensionError);
}

TEST_CASE("losses match an independent forward pass for every variant") {
  Rng rng = make_rng(4);
  for (int n = 2; n <= 6; ++n) {
    Fixture f = random_fixture(7, 5, n, rng);
    for (auto v : kVariants) {
      RewardPredictor<double> p(kState, kAction, small_config(v), rng);
      p.set_log_lambda_cls(0.3);
      p.set_log_lambda_reg(-0.7);
      const auto b = segments::uniform_boundaries(n);
      const auto res = loss_total(p, f.examples, b);
      const auto o = oracle_losses(p, f.examples, b);
      CAPTURE(to_string(v));
      double want = 0.0;
      switch (v) {
        case LossVariant::full:
          want = 0.5 * std::exp(-0.6) * o.ce + 0.3 + 0.5 * std::exp(1.4) * o.reg - 0.7;
          break;
        case LossVariant::equal:
          want = 0.5 * o.ce + 0.5 * o.reg;
          break;
        case LossVariant::cls_only:
          want = 0.5 * std::exp(-0.6) * o.ce + 0.3;
          break;
        case LossVariant::reg_only:
          want = 0.5 * std::exp(1.4) * o.reg - 0.7;
          break;
        case LossVariant::rbrl:
          want = o.ce;
          break;
      }
      CHECK(res.value == doctest::Approx(want).epsilon(1e-10));
      if (uses_classification(v)) CHECK(res.ce == doctest::Approx(o.ce).epsilon(1e-10));
      if (uses_regression(v)) CHECK(res.reg == doctest::Approx(o.reg).epsilon(1e-10));
    }
  }
}

TEST_CASE("loss gradients agree with central differences") {
  Rng rng = make_rng(5);
  const double h = 1e-6;
  for (auto v : kVariants) {
    for (int trial = 0; trial < 3; ++trial) {
      const int n = 2 + trial * 2;
      Fixture f = random_fixture(5, 4, n, rng);
      RewardPredictor<double> p(kState, kAction, small_config(v), rng);
      p.set_log_lambda_cls(0.2 * trial - 0.1);
      p.set_log_lambda_reg(0.5 - 0.3 * trial);
      const auto b = segments::uniform_boundaries(n);
      const auto res = loss_total(p, f.examples, b);

      Eigen::VectorXd base = p.net().parameters();
      Eigen::VectorXd numeric(base.size());
      for (Eigen::Index i = 0; i < base.size(); ++i) {
        Eigen::VectorXd x = base;
        x(i) += h;
        p.net().set_parameters(x);
        const double up = loss_total(p, f.examples, b).value;
        x(i) = base(i) - h;
        p.net().set_parameters(x);
        const double down = loss_total(p, f.examples, b).value;
        numeric(i) = (up - down) / (2 * h);
      }
      p.net().set_parameters(base);
      CAPTURE(to_string(v));
      CHECK(test::max_relative_error(res.net_grad, numeric, 1e-7) < 1e-4);

      const double u = p.log_lambda_cls();
      p.set_log_lambda_cls(u + h);
      const double up = loss_total(p, f.examples, b).value;
      p.set_log_lambda_cls(u - h);
      const double down = loss_total(p, f.examples, b).value;
      p.set_log_lambda_cls(u);
      CHECK(res.grad_log_lambda_cls == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));

      const double w = p.log_lambda_reg();
      p.set_log_lambda_reg(w + h);
      const double up_r = loss_total(p, f.examples, b).value;
      p.set_log_lambda_reg(w - h);
      const double down_r = loss_total(p, f.examples, b).value;
      p.set_log_lambda_reg(w);
      CHECK(res.grad_log_lambda_reg ==
            doctest::Approx((up_r - down_r) / (2 * h)).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("the uncertainty term is stationary at half the log loss") {
  for (double L : {0.05, 0.7, 1.0, 12.0}) {
    const double u_star = 0.5 * std::log(L);
    const double at = combine_losses(LossVariant::cls_only, L, 0.0, u_star, 0.0);
    for (double du : {-0.2, -0.01, 0.01, 0.2}) {
      CHECK(combine_losses(LossVariant::cls_only, L, 0.0, u_star + du, 0.0) > at);
    }
    // d/du of (1/2) e^{-2u} L + u
    const double g = -std::exp(-2 * u_star) * L + 1.0;
    CHECK(std::abs(g) < 1e-12);
  }
}

TEST_CASE("log-uncertainties are clamped") {
  Rng rng = make_rng(6);
  RewardPredictor<double> p(kState, kAction, small_config(), rng);
  p.set_log_lambda_cls(10.0);
  p.set_log_lambda_reg(-10.0);
  CHECK(p.log_lambda_cls() == 4.0);
  CHECK(p.log_lambda_reg() == -4.0);
  CHECK_THROWS(p.set_log_lambda_cls(std::nan("")));
}

TEST_CASE("equal weighting averages the two losses") {
  CHECK(combine_losses(LossVariant::equal, 2.0, 6.0, 1.3, -2.0) == doctest::Approx(4.0));
  CHECK(combine_losses(LossVariant::full, 2.0, 6.0, 0.0, 0.0) == doctest::Approx(4.0));
  CHECK(combine_losses(LossVariant::rbrl, 2.0, 6.0, 1.0, 1.0) == 2.0);
}

TEST_CASE("single-segment batch reduces to the per-segment loss") {
  Rng rng = make_rng(7);
  Fixture f = random_fixture(1, 6, 3, rng);
  RewardPredictor<double> p(kState, kAction, small_config(LossVariant::equal), rng);
  const auto b = segments::uniform_boundaries(3);
  const auto res = loss_total(p, f.examples, b);
  const double r_hat = oracle_return(p, f.segments[0]);
  const double diff = r_hat - f.examples[0].regression_target;
  CHECK(res.reg == doctest::Approx(diff * diff).epsilon(1e-12));
  CHECK(res.r_hat[0] == doctest::Approx(r_hat).epsilon(1e-12));
  CHECK(res.r_tilde[0] == doctest::Approx(r_hat / 6).epsilon(1e-12));
}

TEST_CASE("float predictor tracks the double one") {
  Rng rng = make_rng(8);
  RewardPredictor<double> pd(kState, kAction, small_config(), rng);
  RewardPredictor<float> pf(
      kState, kAction,
      nnet::BasicDenseNet<float>(pd.net().widths(), nnet::Activation::sigmoid), small_config());
  pf.net().set_parameters(pd.net().parameters().cast<float>());
  Fixture f = random_fixture(4, 5, 4, rng);
  const auto b = segments::uniform_boundaries(4);
  const auto a = loss_total(pd, f.examples, b);
  const auto c = loss_total(pf, f.examples, b);
  CHECK(c.value == doctest::Approx(a.value).epsilon(1e-4));
}

TEST_CASE("output bias starts the net at the mean per-step target") {
  Rng rng = make_rng(9);
  Fixture f = random_fixture(20, 10, 4, rng);
  RewardPredictor<double> p(kState, kAction, small_config(), rng);
  const double bias = initialize_output_bias(p, f.examples);
  double mean = 0.0;
  for (const auto& ex : f.examples) mean += ex.regression_target / 10.0;
  mean /= 20.0;
  mean = std::clamp(mean, 1e-3, 0.5);
  CHECK(bias == doctest::Approx(std::log(mean / (1 - mean))));
  // silence the last layer's weights: output is now exactly sigmoid(bias)
  p.net().weight(p.net().layer_count() - 1).setZero();
  CHECK(p.step_reward(Eigen::VectorXd::Zero(kState), Eigen::VectorXd::Zero(kAction)) ==
        doctest::Approx(mean).epsilon(1e-12));
  CHECK_THROWS(initialize_output_bias(p, std::span<const TrainingExample>{}));
}

TEST_CASE("zero epochs leave the predictor untouched") {
  Rng rng = make_rng(10);
  Fixture f = random_fixture(10, 5, 3, rng);
  RewardPredictor<double> p(kState, kAction, small_config(), rng);
  const Eigen::VectorXd before = p.net().parameters();
  RewardTrainingOptions opts;
  opts.max_epochs = 0;
  RewardOptimizer<double> opt(p, opts);
  const auto report = train_reward_model(p, f.examples, 3, opts, opt);
  CHECK(report.epochs.empty());
  CHECK(p.net().parameters() == before);
  CHECK(p.log_lambda_cls() == 0.0);
}

TEST_CASE("training separates a linearly separable rating set") {
  Rng rng = make_rng(11);
  std::vector<segments::Segment> segs;
  std::vector<TrainingExample> examples;
  const int L = 5;
  for (int i = 0; i < 200; ++i) {
    const int label = i % 2;
    segments::Segment s;
    s.segment_id = static_cast<std::uint64_t>(i);
    s.states = test::random_matrix(L, kState, rng, -0.3, 0.3);
    s.states.col(0).array() += label ? 0.7 : -0.7;
    s.actions = test::random_matrix(L, kAction, rng);
    s.step_rewards.assign(L, 0.0);
    segs.push_back(std::move(s));
  }
  for (int i = 0; i < 200; ++i) {
    examples.push_back({&segs[static_cast<std::size_t>(i)], i % 2, rating_target(i % 2, L, 0.5)});
  }
  for (auto v : {LossVariant::full, LossVariant::rbrl}) {
    RewardModelConfig cfg = small_config(v);
    cfg.hidden_layers = {32, 32};
    RewardPredictor<double> p(kState, kAction, cfg, rng);
    RewardTrainingOptions opts;
    opts.max_epochs = 50;
    opts.seed = 5;
    RewardOptimizer<double> opt(p, opts);
    initialize_output_bias(p, examples);
    const auto report = train_reward_model(p, examples, 2, opts, opt);
    REQUIRE_FALSE(report.aborted);
    CAPTURE(to_string(v));
    CHECK(report.epochs.back().accuracy > 0.9);
    CHECK(report.epochs.back().total < report.epochs.front().total);
  }
}

TEST_CASE("training is reproducible for a fixed seed") {
  Rng data_rng = make_rng(12);
  Fixture f = random_fixture(30, 5, 3, data_rng);
  auto run = [&](int batch) {
    Rng rng = make_rng(99);
    RewardPredictor<float> p(kState, kAction, small_config(), rng);
    RewardTrainingOptions opts;
    opts.max_epochs = 5;
    opts.batch_size = batch;
    opts.seed = 3;
    RewardOptimizer<float> opt(p, opts);
    const auto report = train_reward_model(p, f.examples, 3, opts, opt);
    return std::make_pair(p.net().parameters().eval(), report.epochs.back().total);
  };
  CHECK(run(8) == run(8));
  // full batch
  CHECK(run(30) == run(30));
}

TEST_CASE("checkpoint round-trip preserves predictions and state") {
  Rng rng = make_rng(13);
  RewardPredictor<float> p(kState, kAction, small_config(LossVariant::reg_only), rng);
  p.set_log_lambda_cls(-0.25);
  p.set_log_lambda_reg(1.5);
  p.set_boundaries(segments::RatingBoundaries{{0.0, 0.3, 0.35, 1.0}});
  const auto path = test::temp_path("reward.json");
  save_reward_predictor(p, path);
  const auto q = load_reward_predictor<float>(path);
  CHECK(q.net().parameters() == p.net().parameters());
  CHECK(q.log_lambda_cls() == -0.25);
  CHECK(q.log_lambda_reg() == 1.5);
  CHECK(q.variant() == LossVariant::reg_only);
  CHECK(q.boundaries().edges == p.boundaries().edges);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd s = test::random_vector(kState, rng);
    const Eigen::VectorXd a = test::random_vector(kAction, rng);
    CHECK(q.step_reward(s, a) == p.step_reward(s, a));
  }
  std::filesystem::remove(path);

  auto doc = to_json(p);
  doc["format"] = "something-else";
  CHECK_THROWS_AS(reward_predictor_from_json<float>(doc), FormatError);
  doc = to_json(p);
  doc["state_dim"] = 7;
  CHECK_THROWS(reward_predictor_from_json<float>(doc));
}

TEST_CASE("variant names round-trip") {
  for (auto v : kVariants) CHECK(parse_loss_variant(to_string(v)) == v);
  CHECK_THROWS(parse_loss_variant("hybrid"));
  CHECK(uses_classification(LossVariant::rbrl));
  CHECK_FALSE(uses_regression(LossVariant::rbrl));
  CHECK_FALSE(uses_classification(LossVariant::reg_only));
}
