#include "doctest.h"

#include <cmath>
#include <numbers>
#include <set>

#include "ratelab/common/errors.hpp"
#include "ratelab/envs/cartpole.hpp"
#include "ratelab/envs/pendulum.hpp"
#include "ratelab/envs/point_mass.hpp"
#include "test_support.hpp"

using namespace ratelab;
using namespace ratelab::envs;

TEST_CASE("registry knows the three tasks") {
  const auto names = environment_names();
  CHECK(names.size() == 3);
  for (const auto& n : names) CHECK(make_environment(n)->spec().name == n);
  CHECK_THROWS_AS(make_environment("walker"), std::invalid_argument);
  CHECK(make_environment("cartpole-balance")->spec().horizon == 200);
  CHECK(make_environment("point-mass")->spec().horizon == 150);
  CHECK(make_environment("pendulum-swingup")->spec().state_dim == 3);
}

TEST_CASE("cartpole resets near upright") {
  CartPoleBalance env;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = env.reset(seed);
    CHECK(std::abs(s(2)) <= 0.05);
  }
}

TEST_CASE("reset is reproducible and seed-sensitive") {
  for (const auto& name : environment_names()) {
    auto env = make_environment(name);
    CHECK(env->reset(42) == env->reset(42));
    std::set<std::vector<double>> seen;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto s = env->reset(seed);
      seen.insert(std::vector<double>(s.data(), s.data() + s.size()));
    }
    CHECK(seen.size() == 100);
  }
}

TEST_CASE("optimum states earn the maximum reward") {
  CartPoleBalance cp;
  CHECK(cp.reward(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(1)) == cp.spec().max_step_reward);
  PointMass pm;
  CHECK(pm.reward(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(2)) == pm.spec().max_step_reward);
  PendulumSwingup pd;
  Eigen::Vector3d up(1.0, 0.0, 0.0);
  CHECK(pd.reward(up, Eigen::VectorXd::Zero(1)) == pd.spec().max_step_reward);
}

TEST_CASE("hanging pendulum earns nothing") {
  PendulumSwingup pd;
  Eigen::Vector3d down(std::cos(std::numbers::pi), std::sin(std::numbers::pi), 0.0);
  CHECK(pd.reward(down, Eigen::VectorXd::Zero(1)) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("cartpole reward is gated by the track") {
  CartPoleBalance cp;
  Eigen::Vector4d s(0.0, 0.0, 0.3, 0.0);
  CHECK(cp.reward(s, Eigen::VectorXd::Zero(1)) == doctest::Approx(std::cos(0.3)));
  s(0) = 2.5;
  CHECK(cp.reward(s, Eigen::VectorXd::Zero(1)) == 0.0);
  s << 0.0, 0.0, 2.0, 0.0;
  CHECK(cp.reward(s, Eigen::VectorXd::Zero(1)) == 0.0);
}

TEST_CASE("stepping rules") {
  PointMass env;
  CHECK_THROWS_AS(env.step(Eigen::VectorXd::Zero(2)), StateError);
  env.reset(1);
  CHECK_THROWS_AS(env.step(Eigen::VectorXd::Zero(3)), DimensionError);
  Transition t;
  for (int i = 0; i < env.spec().horizon; ++i) {
    REQUIRE_FALSE(env.episode_over());
    t = env.step(Eigen::VectorXd::Zero(2));
  }
  CHECK(t.done);
  CHECK_FALSE(t.terminated);
  CHECK_THROWS_AS(env.step(Eigen::VectorXd::Zero(2)), StateError);
}

TEST_CASE("out-of-bounds actions are clamped and flagged") {
  PointMass env;
  env.reset(3);
  auto t = env.step(Eigen::Vector2d(3.0, -0.5));
  CHECK(t.action_clamped);
  CHECK(t.action == Eigen::Vector2d(1.0, -0.5));
  t = env.step(Eigen::Vector2d(0.2, -0.5));
  CHECK_FALSE(t.action_clamped);
}

TEST_CASE("point-mass step matches an independent semi-implicit Euler oracle") {
  PointMass env;
  const double h = 0.02 / 10;
  Eigen::Vector4d s(0.3, -0.4, 0.1, 0.2);
  env.set_physical_state(s);
  Rng rng = make_rng(5);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd a = test::random_vector(2, rng);
    double px = s(0), py = s(1), vx = s(2), vy = s(3);
    for (int i = 0; i < 10; ++i) {
      vx += h * 2.0 * a(0);
      vy += h * 2.0 * a(1);
      px += h * vx;
      py += h * vy;
    }
    const auto t = env.step(a);
    CHECK(t.ground_truth_reward == doctest::Approx(std::exp(-(s(0) * s(0) + s(1) * s(1)) / 0.25)));
    CHECK(t.next_state(0) == doctest::Approx(px).epsilon(1e-14));
    CHECK(t.next_state(1) == doctest::Approx(py).epsilon(1e-14));
    CHECK(t.next_state(2) == doctest::Approx(vx).epsilon(1e-14));
    CHECK(t.next_state(3) == doctest::Approx(vy).epsilon(1e-14));
    s = t.next_state;
  }
}

TEST_CASE("cartpole upright at rest stays put under zero force") {
  CartPoleBalance env;
  env.set_physical_state(Eigen::VectorXd::Zero(4));
  for (int i = 0; i < 50; ++i) {
    const auto t = env.step(Eigen::VectorXd::Zero(1));
    CHECK(t.ground_truth_reward == 1.0);
    CHECK(t.next_state.isZero());
  }
}

TEST_CASE("cartpole pole falls toward its lean and the cart leaving the track ends the episode") {
  CartPoleBalance env;
  env.set_physical_state(Eigen::Vector4d(0.0, 0.0, 0.05, 0.0));
  auto t = env.step(Eigen::VectorXd::Zero(1));
  CHECK(t.next_state(3) > 0.0);

  env.set_physical_state(Eigen::Vector4d(2.39, 2.0, 0.0, 0.0));
  t = env.step(Eigen::VectorXd::Ones(1));
  CHECK(t.done);
  CHECK(t.terminated);
}

TEST_CASE("physics is deterministic") {
  for (const auto& name : environment_names()) {
    auto a = make_environment(name), b = make_environment(name);
    a->reset(9);
    b->reset(9);
    Rng rng = make_rng(2);
    for (int i = 0; i < 30 && !a->episode_over(); ++i) {
      const Eigen::VectorXd act = test::random_vector(a->spec().action_dim, rng);
      CHECK(a->step(act).next_state == b->step(act).next_state);
    }
  }
}

TEST_CASE("undamped pendulum conserves energy") {
  PendulumParams p;
  p.damping = 0.0;
  PendulumSwingup env(p);
  // start at 90 degrees so both energy terms move
  Eigen::Vector2d s(std::numbers::pi / 2, 0.0);
  env.set_physical_state(s);
  const double mgl = p.mass * p.gravity * p.length;
  double start = env.mechanical_energy(env.physical_state());
  for (int block = 0; block < 5; ++block) {
    // re-seating the state restarts the step counter without touching physics
    env.set_physical_state(env.physical_state());
    for (int i = 0; i < 100; ++i) env.step(Eigen::VectorXd::Zero(1));
    const double now = env.mechanical_energy(env.physical_state());
    CHECK(std::abs(now - start) / mgl < 0.01);
    start = now;
  }
}

TEST_CASE("pendulum starts hanging down") {
  PendulumSwingup env;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto obs = env.reset(seed);
    CHECK(obs(0) < -0.99);
  }
}

TEST_CASE("rewards stay in bounds over a million random transitions") {
  for (const auto& name : environment_names()) {
    auto env = make_environment(name);
    Rng rng = make_rng(31);
    std::uint64_t episode = 0;
    double lo = 1e9, hi = -1e9;
    env->reset(episode);
    for (int i = 0; i < 1'000'000 / 3; ++i) {
      if (env->episode_over()) env->reset(++episode);
      const auto t = env->step(test::random_vector(env->spec().action_dim, rng, -1.5, 1.5));
      lo = std::min(lo, t.ground_truth_reward);
      hi = std::max(hi, t.ground_truth_reward);
    }
    CHECK(lo >= 0.0);
    CHECK(hi <= env->spec().max_step_reward);
  }
}

TEST_CASE("uniformly random play stays below 40 percent of the best return") {
  for (const auto& name : environment_names()) {
    auto env = make_environment(name);
    Rng rng = make_rng(12);
    double total = 0.0;
    const int episodes = 100;
    for (int e = 0; e < episodes; ++e) {
      env->reset(static_cast<std::uint64_t>(e));
      while (!env->episode_over()) {
        total += env->step(test::random_vector(env->spec().action_dim, rng)).ground_truth_reward;
      }
    }
    const double mean = total / episodes;
    CAPTURE(name);
    CHECK(mean < 0.4 * env->spec().horizon * env->spec().max_step_reward);
  }
}

TEST_CASE("scripted point-mass controller homes in on the goal") {
  PointMass env;
  env.reset(4);
  double last = 0.0;
  while (!env.episode_over()) {
    last = env.step(point_mass_scripted_action(env.params(), env.observation())).ground_truth_reward;
  }
  CHECK(last > 0.99);
}

TEST_CASE("clones start fresh and share parameters") {
  CartPoleParams p;
  p.force_scale = 5.0;
  CartPoleBalance env(p);
  env.reset(1);
  auto copy = env.clone();
  CHECK_FALSE(copy->started());
  CHECK(dynamic_cast<CartPoleBalance&>(*copy).params().force_scale == 5.0);
}
