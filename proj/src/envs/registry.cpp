#include <stdexcept>

#include "ratelab/envs/cartpole.hpp"
#include "ratelab/envs/environment.hpp"
#include "ratelab/envs/pendulum.hpp"
#include "ratelab/envs/point_mass.hpp"

namespace ratelab::envs {

std::vector<std::string> environment_names() {
  return {"cartpole-balance", "point-mass", "pendulum-swingup"};
}

std::unique_ptr<Environment> make_environment(std::string_view name) {
  if (name == "cartpole-balance") return std::make_unique<CartPoleBalance>();
  if (name == "point-mass") return std::make_unique<PointMass>();
  if (name == "pendulum-swingup") return std::make_unique<PendulumSwingup>();
  throw std::invalid_argument("unknown environment '" + std::string(name) + "'");
}

}  // namespace ratelab::envs
