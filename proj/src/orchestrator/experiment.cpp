#include "ratelab/orchestrator/experiment.hpp"

#include <chrono>
#include <fstream>
#include <span>

#include "ratelab/common/random.hpp"
#include "ratelab/envs/environment.hpp"
#include "ratelab/ppo/evaluation.hpp"
#include "ratelab/ppo/gae.hpp"
#include "ratelab/rating_service/http_server.hpp"
#include "ratelab/reward_model/checkpoint.hpp"
#include "ratelab/segments/dataset_io.hpp"
#include "ratelab/segments/segment.hpp"

namespace ratelab::orchestrator {

namespace {

// Experiment pipelines run in single precision.
using Real = float;

// Independent random streams per run.
enum Stream : std::uint64_t {
  kSegments = 1,
  kRewardInit = 2,
  kRewardShuffle = 3,
  kPolicyInit = 4,
  kRollout = 5,
  kUpdate = 6,
  kEvaluation = 7,
  kRetrain = 8,
};

class RunContext {
 public:
  RunContext(const ExperimentConfig& config, std::uint64_t seed, MetricsSink& sink)
      : hash_(config_hash(config)), seed_(seed), sink_(sink) {}

  void emit(const std::string& event, nlohmann::json fields) {
    fields["event"] = event;
    fields["run"] = hash_;
    fields["seed"] = seed_;
    sink_.emit(fields);
  }

  const std::string& hash() const { return hash_; }

 private:
  std::string hash_;
  std::uint64_t seed_;
  MetricsSink& sink_;
};

std::vector<segments::Segment> collect_segments(const ExperimentConfig& config,
                                                envs::Environment& env,
                                                std::uint64_t seed) {
  Rng rng = make_rng(seed, kSegments);
  const auto policy =
      segments::sticky_random_policy(env.spec(), config.segment_action_hold);
  segments::CollectionOptions opts;
  opts.length = config.segment_length;
  std::vector<segments::Segment> out;
  out.reserve(static_cast<std::size_t>(config.n_ratings));
  for (int i = 0; i < config.n_ratings; ++i) {
    out.push_back(segments::collect_segment(env, policy, rng, opts,
                                            static_cast<std::uint64_t>(i)));
  }
  return out;
}

segments::RatingDataset synthetic_ratings(const ExperimentConfig& config,
                                          const envs::EnvSpec& spec,
                                          std::vector<segments::Segment> segs) {
  const std::vector<double> edges =
      config.synthetic_boundaries.empty()
          ? segments::default_synthetic_boundaries(spec, config.n_classes,
                                                   config.segment_length,
                                                   config.synthetic_top_fraction)
          : config.synthetic_boundaries;
  segments::RatingDataset dataset(config.n_classes);
  for (auto& s : segs) {
    const int rating = segments::synthetic_rate(s, edges);
    dataset.add(segments::make_rating_example(std::move(s), rating, config.n_classes,
                                              segments::RaterKind::synthetic));
  }
  return dataset;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

std::filesystem::path run_directory(const ExperimentConfig& config, std::uint64_t seed) {
  return config.output_dir / (config_hash(config) + "-s" + std::to_string(seed));
}

RunRecord run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const RunOptions& options) {
  validate(config);
  const auto started = std::chrono::steady_clock::now();
  NullMetricsSink null_sink;
  RunContext ctx(config, seed, options.sink ? *options.sink : null_sink);

  RunRecord record;
  record.config_hash = ctx.hash();
  record.config = config;
  record.seed = seed;
  auto finish = [&]() -> RunRecord {
    record.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    ctx.emit("run_end", {{"failed", record.failed},
                         {"paused", record.paused},
                         {"final_return", record.final_return()},
                         {"diagnostic", record.diagnostic}});
    return record;
  };

  const std::filesystem::path dir =
      config.output_dir.empty() ? std::filesystem::path{} : run_directory(config, seed);
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    write_text(dir / "config.txt", dump_config(config));
  }

  auto env = envs::make_environment(config.env);
  const envs::EnvSpec& spec = env->spec();
  const auto objective = loss_variant(config.variant);

  // Phase 1: ratings and reward model.
  std::optional<reward::RewardPredictor<Real>> predictor;
  std::optional<segments::RatingDataset> dataset;
  reward::RewardTrainingOptions reward_options;
  std::unique_ptr<reward::RewardOptimizer<Real>> reward_opt;
  std::unique_ptr<rating::RatingService> service;
  std::unique_ptr<rating::RatingHttpServer> server;

  // Trains on the whole dataset; round 0 is the phase-1 fit. False when
  // training aborted (the record is marked failed).
  auto train_reward = [&](int round) {
    const auto examples = reward::make_training_examples(*dataset, config.alpha);
    const std::span<const reward::TrainingExample> view(examples);
    if (round == 0) reward::initialize_output_bias(*predictor, view);
    reward_options.seed =
        derive_seed(derive_seed(seed, kRewardShuffle), static_cast<std::uint64_t>(round));
    auto report = reward::train_reward_model(*predictor, view, dataset->n_classes(),
                                             reward_options, *reward_opt);
    for (const auto& e : report.epochs) {
      ctx.emit("reward_epoch", {{"round", round},
                                {"epoch", e.epoch},
                                {"ce", e.ce},
                                {"reg", e.reg},
                                {"total", e.total},
                                {"log_lambda_cls", e.log_lambda_cls},
                                {"log_lambda_reg", e.log_lambda_reg},
                                {"accuracy", e.accuracy}});
    }
    const bool aborted = report.aborted;
    if (aborted) {
      record.failed = true;
      record.diagnostic = "reward training aborted: " + report.diagnostic;
    }
    record.reward_report = std::move(report);
    return !aborted;
  };

  if (objective) {
    ctx.emit("phase", {{"phase", "collecting"}});
    auto segs = collect_segments(config, *env, seed);
    if (config.rating_mode == RatingMode::synthetic) {
      dataset = synthetic_ratings(config, spec, std::move(segs));
      if (!dir.empty()) segments::save_jsonl(*dataset, dir / "ratings.jsonl");
    } else {
      rating::RatingServiceOptions so;
      so.n_classes = config.n_classes;
      so.required = static_cast<std::size_t>(config.n_ratings);
      so.lease_seconds = config.lease_seconds;
      if (!dir.empty()) so.jsonl_path = dir / "ratings.jsonl";
      service = std::make_unique<rating::RatingService>(so);
      for (auto& s : segs) service->add_pending(std::move(s));
      server = std::make_unique<rating::RatingHttpServer>(*service);
      server->start(config.http_host, config.http_port);
      if (options.on_http_ready) options.on_http_ready(server->port());
      const auto timeout = std::chrono::milliseconds(
          static_cast<std::int64_t>(config.http_timeout * 1000.0));
      if (!service->wait_for_ratings(so.required, timeout)) {
        record.paused = true;
        record.diagnostic = "paused waiting for ratings (" +
                            std::to_string(service->rated()) + "/" +
                            std::to_string(so.required) +
                            "); rerun with the same output_dir to resume";
        return finish();
      }
      dataset = service->dataset();
    }
    record.rating_counts = dataset->class_counts();
    ctx.emit("ratings", {{"count", dataset->size()}, {"class_counts", record.rating_counts}});
    ctx.emit("phase", {{"phase", "training"}});

    reward::RewardModelConfig rc;
    rc.hidden_layers = config.hidden_layers;
    rc.kappa = config.kappa;
    rc.alpha = config.alpha;
    rc.variant = *objective;
    rc.log_lambda_limit = config.log_lambda_limit;
    Rng init = make_rng(seed, kRewardInit);
    predictor.emplace(spec.state_dim, spec.action_dim, rc, init);

    reward_options.max_epochs = config.reward_max_epochs;
    reward_options.batch_size = config.reward_batch_size;
    reward_options.optimizer.learning_rate = config.reward_learning_rate;
    reward_options.uncertainty_learning_rate = config.uncertainty_learning_rate;
    reward_options.early_stopping = config.reward_early_stopping;
    reward_options.patience = config.reward_patience;
    reward_options.min_improvement = config.reward_min_improvement;
    reward_opt = std::make_unique<reward::RewardOptimizer<Real>>(*predictor, reward_options);
    if (!train_reward(0)) return finish();
    if (!dir.empty()) {
      record.reward_checkpoint = dir / "reward_model.json";
      reward::save_reward_predictor(*predictor, record.reward_checkpoint);
    }
    if (service) service->set_phase(rating::Phase::policy_learning);
  }

  // Phase 2: PPO.
  ctx.emit("phase", {{"phase", "policy_learning"}});
  Rng init = make_rng(seed, kPolicyInit);
  ppo::PolicyConfig pc;
  pc.hidden_layers = config.hidden_layers;
  pc.initial_log_std = config.initial_log_std;
  ppo::GaussianPolicy<Real> policy(spec, pc, init);
  ppo::ValueNet<Real> value(spec.state_dim, config.hidden_layers, init);
  ppo::PpoOptimizer<Real> opt(policy, value, config.ppo);
  ppo::RolloutCollector<Real> collector(env->clone(), derive_seed(seed, kRollout));
  Rng update_rng = make_rng(seed, kUpdate);
  const auto source = predictor ? ppo::RewardSource<Real>::learned(*predictor)
                                : ppo::RewardSource<Real>::environment();
  const std::uint64_t eval_seed = derive_seed(seed, kEvaluation);

  auto evaluate = [&](std::int64_t step) {
    const auto res = ppo::evaluate_policy(policy, *env, config.eval_episodes, eval_seed);
    record.curve.push_back({step, res.mean, res.standard_error});
    ctx.emit("eval", {{"step", step},
                      {"mean_return", res.mean},
                      {"stderr", res.standard_error}});
  };

  Rng retrain_rng = make_rng(seed, kRetrain);
  int retrain_round = 0;
  // Optional on-policy top-up: fresh segments from the current policy are
  // rated synthetically and the predictor keeps training on the grown set.
  auto retrain = [&]() {
    const segments::ActionPolicy current = [&policy](const Eigen::VectorXd& state,
                                                     Rng& rng) {
      return policy.sample(state, rng).action;
    };
    segments::CollectionOptions opts;
    opts.length = config.segment_length;
    std::vector<segments::Segment> segs;
    for (int i = 0; i < config.reward_retrain_ratings; ++i) {
      segs.push_back(segments::collect_segment(*env, current, retrain_rng, opts,
                                               dataset->size() + segs.size()));
    }
    auto extra = synthetic_ratings(config, spec, std::move(segs));
    for (const auto& ex : extra.examples()) dataset->add(ex);
    ++retrain_round;
    ctx.emit("ratings", {{"count", dataset->size()},
                         {"class_counts", dataset->class_counts()},
                         {"round", retrain_round}});
    record.rating_counts = dataset->class_counts();
    return train_reward(retrain_round);
  };

  evaluate(0);
  std::int64_t steps = 0;
  std::int64_t next_eval = config.eval_interval;
  std::int64_t next_retrain =
      predictor && config.reward_retrain_interval > 0 ? config.reward_retrain_interval : -1;
  while (steps < config.total_steps) {
    const int n = static_cast<int>(
        std::min<std::int64_t>(config.ppo.rollout_length, config.total_steps - steps));
    auto batch = collector.collect(policy, value, source, n);
    steps += n;
    ppo::compute_gae(batch, config.ppo.gamma, config.ppo.gae_lambda);
    const auto rep = ppo::ppo_update(policy, value, opt, batch, config.ppo, update_rng);
    double train_reward = 0.0;
    for (double r : batch.rewards) train_reward += r / static_cast<double>(batch.size());
    ctx.emit("ppo_update", {{"step", steps},
                            {"mean_ratio", rep.mean_ratio},
                            {"clip_fraction", rep.clip_fraction},
                            {"entropy", rep.entropy},
                            {"policy_loss", rep.policy_loss},
                            {"value_loss", rep.value_loss},
                            {"approx_kl", rep.approx_kl},
                            {"train_reward", train_reward}});
    if (rep.aborted) {
      record.failed = true;
      record.diagnostic = "ppo update aborted: " + rep.diagnostic;
      return finish();
    }
    if (next_retrain > 0 && steps >= next_retrain && steps < config.total_steps) {
      if (!retrain()) return finish();
      while (next_retrain <= steps) next_retrain += config.reward_retrain_interval;
    }
    if (steps >= next_eval || steps == config.total_steps) {
      evaluate(steps);
      while (next_eval <= steps) next_eval += config.eval_interval;
    }
  }

  if (retrain_round > 0 && !dir.empty()) {
    segments::save_jsonl(*dataset, dir / "ratings.jsonl");
    reward::save_reward_predictor(*predictor, record.reward_checkpoint);
  }
  if (!dir.empty()) {
    record.policy_checkpoint = dir / "policy.json";
    ppo::save_policy(policy, value, record.policy_checkpoint);
  }
  if (service) service->set_phase(rating::Phase::finished);
  ctx.emit("phase", {{"phase", "finished"}});
  return finish();
}

}  // namespace ratelab::orchestrator
