#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>

#include "ratelab/common/errors.hpp"
#include "ratelab/nnet/adam.hpp"
#include "ratelab/nnet/dense_net.hpp"
#include "ratelab/nnet/serialization.hpp"
#include "test_support.hpp"

using namespace ratelab;
using nnet::Activation;
using nnet::DenseNet;

namespace {

// Straight-line evaluation through the weight/bias views.
Eigen::VectorXd hand_forward(const DenseNet& net, const Eigen::VectorXd& x) {
  std::vector<double> h(x.data(), x.data() + x.size());
  for (int l = 0; l < net.layer_count(); ++l) {
    const auto W = net.weight(l);
    const auto b = net.bias(l);
    std::vector<double> next(static_cast<std::size_t>(W.rows()));
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      double acc = b(r);
      for (Eigen::Index c = 0; c < W.cols(); ++c) acc += W(r, c) * h[static_cast<std::size_t>(c)];
      const bool last = l + 1 == net.layer_count();
      if (!last || net.output_activation() == Activation::tanh) {
        acc = std::tanh(acc);
      } else if (net.output_activation() == Activation::sigmoid) {
        acc = 1.0 / (1.0 + std::exp(-acc));
      }
      next[static_cast<std::size_t>(r)] = acc;
    }
    h = std::move(next);
  }
  return Eigen::Map<Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
}

}  // namespace

TEST_CASE("zero-weight net outputs its last bias through the output activation") {
  DenseNet net({3, 4, 2}, Activation::sigmoid);
  net.bias(1) << 0.0, 2.0;
  const auto y = net.forward(Eigen::Vector3d(5.0, -1.0, 0.3));
  CHECK(y(0) == doctest::Approx(0.5));
  CHECK(y(1) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
}

TEST_CASE("single identity layer passes the input through") {
  DenseNet net({1, 1}, Activation::identity);
  net.weight(0)(0, 0) = 1.0;
  CHECK(net.forward(Eigen::VectorXd::Constant(1, 0.5))(0) == 0.5);
}

TEST_CASE("seeded 2-3-1 net matches a hand-rolled forward pass") {
  Rng rng = make_rng(11);
  auto net = DenseNet::xavier({2, 3, 1}, Activation::identity, rng);
  net.bias(0) << 0.1, -0.2, 0.3;
  net.bias(1) << 0.05;
  const Eigen::Vector2d x(1.0, -1.0);
  CHECK(net.forward(x)(0) == doctest::Approx(hand_forward(net, x)(0)).epsilon(1e-14));
  for (auto act : {Activation::sigmoid, Activation::tanh}) {
    DenseNet other({2, 3, 1}, act);
    other.set_parameters(net.parameters());
    CHECK(other.forward(x)(0) == doctest::Approx(hand_forward(other, x)(0)).epsilon(1e-14));
  }
}

TEST_CASE("forward checks the input width") {
  DenseNet net({3, 2}, Activation::identity);
  CHECK_THROWS_AS(net.forward(Eigen::VectorXd::Zero(2)), DimensionError);
  CHECK_THROWS_AS(net.forward_batch(Eigen::MatrixXd::Zero(4, 5)), DimensionError);
}

TEST_CASE("batched forward equals per-column forward") {
  Rng rng = make_rng(3);
  auto net = DenseNet::xavier({4, 8, 8, 2}, Activation::sigmoid, rng);
  const Eigen::MatrixXd X = test::random_matrix(4, 7, rng);
  const Eigen::MatrixXd Y = net.forward_batch(X);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    CHECK((Y.col(c) - net.forward(X.col(c))).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("two stacked nets compose to one") {
  Rng rng = make_rng(5);
  auto full = DenseNet::xavier({3, 5, 2}, Activation::identity, rng);
  DenseNet first({3, 5}, Activation::tanh);
  first.weight(0) = full.weight(0);
  first.bias(0) = test::random_vector(5, rng);
  full.bias(0) = first.bias(0);
  DenseNet second({5, 2}, Activation::identity);
  second.weight(0) = full.weight(1);
  const Eigen::Vector3d x(0.2, -0.7, 1.1);
  CHECK((full.forward(x) - second.forward(first.forward(x))).norm() < 1e-15);
}

TEST_CASE("backward without a cached forward is an error") {
  DenseNet net({2, 2}, Activation::identity);
  CHECK_THROWS_AS(net.backward(Eigen::MatrixXd::Ones(2, 1)), StateError);
  net.forward_train(Eigen::MatrixXd::Ones(2, 1));
  net.clear_cache();
  CHECK_THROWS_AS(net.backward(Eigen::MatrixXd::Ones(2, 1)), StateError);
}

TEST_CASE("output-squared loss at zero output has zero output-layer gradient") {
  Rng rng = make_rng(8);
  auto net = DenseNet::xavier({3, 4, 1}, Activation::identity, rng);
  net.weight(1).setZero();
  const Eigen::MatrixXd x = test::random_matrix(3, 1, rng);
  const auto& y = net.forward_train(x);
  REQUIRE(y(0, 0) == 0.0);
  const auto g = net.backward(2.0 * y);
  CHECK(g.parameters.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant loss gives zero gradient everywhere") {
  Rng rng = make_rng(9);
  auto net = DenseNet::xavier({3, 6, 2}, Activation::sigmoid, rng);
  net.forward_train(test::random_matrix(3, 4, rng));
  const auto g = net.backward(Eigen::MatrixXd::Zero(2, 4));
  CHECK(g.parameters.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.input.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parameter and input gradients match central differences") {
  for (auto act : {Activation::identity, Activation::sigmoid, Activation::tanh}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng = make_rng(seed, 17);
      auto net = DenseNet::xavier({4, 7, 5, 3}, act, rng);
      net.set_parameters(net.parameters() + 0.1 * test::random_vector(
                                                  static_cast<Eigen::Index>(net.parameter_count()), rng));
      const Eigen::MatrixXd X = test::random_matrix(4, 3, rng);
      const Eigen::MatrixXd C = test::random_matrix(3, 3, rng);
      // loss = sum(C .* out^2) / 2, dL/dout = C .* out
      auto loss = [&](const DenseNet& n, const Eigen::MatrixXd& in) {
        return 0.5 * (C.array() * n.forward_batch(in).array().square()).sum();
      };
      const auto& out = net.forward_train(X);
      const auto g = net.backward((C.array() * out.array()).matrix());

      const double h = 1e-5;
      Eigen::VectorXd numeric(net.parameters().size());
      DenseNet probe = net;
      for (Eigen::Index i = 0; i < numeric.size(); ++i) {
        Eigen::VectorXd p = net.parameters();
        p(i) += h;
        probe.set_parameters(p);
        const double up = loss(probe, X);
        p(i) -= 2 * h;
        probe.set_parameters(p);
        numeric(i) = (up - loss(probe, X)) / (2 * h);
      }
      CHECK(test::max_relative_error(g.parameters, numeric) < 1e-4);

      Eigen::MatrixXd numeric_in(X.rows(), X.cols());
      for (Eigen::Index i = 0; i < X.size(); ++i) {
        Eigen::MatrixXd Xp = X;
        Xp(i) += h;
        const double up = loss(net, Xp);
        Xp(i) -= 2 * h;
        numeric_in(i) = (up - loss(net, Xp)) / (2 * h);
      }
      CHECK(test::max_relative_error(g.input.reshaped(), numeric_in.reshaped()) < 1e-4);
    }
  }
}

TEST_CASE("xavier init is seeded and bounded") {
  Rng a = make_rng(21), b = make_rng(21), c = make_rng(22);
  const auto n1 = DenseNet::xavier({6, 10, 2}, Activation::identity, a);
  const auto n2 = DenseNet::xavier({6, 10, 2}, Activation::identity, b);
  const auto n3 = DenseNet::xavier({6, 10, 2}, Activation::identity, c);
  CHECK(n1.parameters() == n2.parameters());
  CHECK(n1.parameters() != n3.parameters());
  CHECK(n1.weight(0).cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 16.0));
  CHECK(n1.weight(1).cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 12.0));
  CHECK(n1.bias(0).isZero());
}

TEST_CASE("set_parameters rejects non-finite values and keeps the old ones") {
  DenseNet net({2, 2}, Activation::identity);
  Eigen::VectorXd p = Eigen::VectorXd::Ones(6);
  p(3) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(net.set_parameters(p), NonFiniteError);
  CHECK(net.parameters().isZero());
  CHECK_THROWS_AS(net.set_parameters(Eigen::VectorXd::Ones(5)), DimensionError);
}

TEST_CASE("widths must be positive and at least two") {
  CHECK_THROWS(DenseNet({3}, Activation::identity));
  CHECK_THROWS(DenseNet({3, 0, 1}, Activation::identity));
}

TEST_CASE("activation names round-trip") {
  for (auto act : {Activation::identity, Activation::sigmoid, Activation::tanh}) {
    CHECK(nnet::parse_activation(nnet::to_string(act)) == act);
  }
  CHECK(nnet::parse_activation("none") == Activation::identity);
  CHECK_THROWS(nnet::parse_activation("relu"));
}

TEST_CASE("adam: zero gradient leaves parameters and decays moments") {
  nnet::Adam<double> opt(2, nnet::AdamConfig{0.1});
  Eigen::VectorXd p(2);
  p << 1.0, -2.0;
  REQUIRE(opt.step(p, Eigen::VectorXd::Ones(2)) == nnet::StepStatus::applied);
  const Eigen::VectorXd before = p;
  const Eigen::VectorXd m = opt.first_moment();
  // with a decayed first moment the parameters still move; a fresh
  // optimizer with zero history must not
  nnet::Adam<double> fresh(2, nnet::AdamConfig{0.1});
  Eigen::VectorXd q = before;
  REQUIRE(fresh.step(q, Eigen::VectorXd::Zero(2)) == nnet::StepStatus::applied);
  CHECK(q == before);
  opt.step(p, Eigen::VectorXd::Zero(2));
  CHECK(opt.first_moment().isApprox(0.9 * m));
  CHECK(opt.steps() == 2);
}

TEST_CASE("adam: scalar with g = 1 matches the hand recursion") {
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  nnet::Adam<double> opt(1, nnet::AdamConfig{lr});
  Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
  double x = 0.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 5; ++t) {
    opt.step(p, Eigen::VectorXd::Ones(1));
    m = b1 * m + (1 - b1);
    v = b2 * v + (1 - b2);
    x -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    CHECK(p(0) == doctest::Approx(x).epsilon(1e-12));
    if (t == 1) CHECK(p(0) == doctest::Approx(-0.1).epsilon(1e-6));
  }
}

TEST_CASE("adam: zero learning rate leaves parameters") {
  nnet::Adam<double> opt(3, nnet::AdamConfig{0.0});
  Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(3, -1, 1);
  const Eigen::VectorXd before = p;
  opt.step(p, Eigen::VectorXd::Constant(3, 4.0));
  CHECK(p == before);
}

TEST_CASE("adam: non-finite gradient is rejected without side effects") {
  nnet::Adam<float> opt(2, nnet::AdamConfig{0.01});
  Eigen::VectorXf p = Eigen::VectorXf::Ones(2);
  Eigen::VectorXf g(2);
  g << 1.0f, std::numeric_limits<float>::infinity();
  CHECK(opt.step(p, g) == nnet::StepStatus::rejected_nonfinite_gradient);
  CHECK(p == Eigen::VectorXf::Ones(2));
  CHECK(opt.steps() == 0);
  CHECK(opt.first_moment().isZero());
  CHECK_THROWS_AS(opt.step(p, Eigen::VectorXf::Ones(3)), DimensionError);
  CHECK_THROWS(nnet::Adam<float>(2, nnet::AdamConfig{-1.0}));
}

TEST_CASE("checkpoint JSON round-trips and validates shapes") {
  Rng rng = make_rng(4);
  auto net = DenseNet::xavier({3, 5, 1}, Activation::sigmoid, rng);
  net.bias(0).setConstant(0.125);
  const auto doc = nnet::to_json(net);
  const auto back = nnet::dense_net_from_json<double>(doc);
  CHECK(back.widths() == net.widths());
  CHECK(back.output_activation() == Activation::sigmoid);
  CHECK(back.parameters() == net.parameters());

  CHECK_THROWS_AS(nnet::dense_net_from_json<double>(doc, std::vector<int>{3, 4, 1}),
                  FormatError);
  auto broken = doc;
  broken["layers"][0]["bias"].erase(0);
  CHECK_THROWS_AS(nnet::dense_net_from_json<double>(broken), FormatError);
  auto wrong_widths = doc;
  wrong_widths["widths"] = {3, 6, 1};
  CHECK_THROWS_AS(nnet::dense_net_from_json<double>(wrong_widths), FormatError);

  const auto path = test::temp_path("net.json");
  nnet::save_dense_net(net, path);
  const auto loaded = nnet::load_dense_net<float>(path);
  CHECK((loaded.parameters().cast<double>() - net.parameters()).cwiseAbs().maxCoeff() < 1e-7);
  std::filesystem::remove(path);
}

TEST_CASE("identical seeds give bit-identical outputs") {
  auto build = [] {
    Rng rng = make_rng(77);
    return nnet::DenseNetF::xavier({5, 16, 16, 1}, Activation::sigmoid, rng);
  };
  const auto a = build(), b = build();
  Rng in = make_rng(1);
  const Eigen::MatrixXf X = test::random_matrix(5, 20, in).cast<float>();
  CHECK(a.forward_batch(X) == b.forward_batch(X));
}
