// ratelab command line: single runs, run matrices, curve files and traces.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "ratelab/envs/environment.hpp"
#include "ratelab/nnet/serialization.hpp"
#include "ratelab/orchestrator/curves.hpp"
#include "ratelab/orchestrator/matrix.hpp"
#include "ratelab/ppo/policy.hpp"
#include "ratelab/segments/dataset_io.hpp"

namespace fs = std::filesystem;
using namespace ratelab;
using namespace ratelab::orchestrator;

namespace {

void print_record(const RunRecord& r) {
  std::printf("run %s seed %llu: %s\n", r.config_hash.c_str(),
              static_cast<unsigned long long>(r.seed),
              r.failed ? "FAILED" : r.paused ? "PAUSED" : "ok");
  if (!r.diagnostic.empty()) std::printf("  %s\n", r.diagnostic.c_str());
  if (r.reward_report) {
    const auto& ep = r.reward_report->epochs;
    if (!ep.empty()) {
      std::printf("  reward model: %zu epochs, loss %.4f, accuracy %.3f, u_cls %.3f, u_reg %.3f\n",
                  ep.size(), ep.back().total, ep.back().accuracy, ep.back().log_lambda_cls,
                  ep.back().log_lambda_reg);
    }
  }
  for (const auto& p : r.curve) {
    std::printf("  step %8lld  return %9.3f +- %.3f\n", static_cast<long long>(p.step),
                p.mean_return, p.standard_error);
  }
  std::printf("  wall clock %.1f s\n", r.wall_clock_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rating-based reward learning experiments"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one experiment for one seed");
  fs::path run_config;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_variant;
  std::optional<int> run_classes;
  std::optional<std::string> run_mode;
  std::optional<std::string> run_host;
  std::optional<int> run_port;
  std::optional<std::string> run_output;
  fs::path run_metrics;
  run->add_option("--config", run_config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_seed, "Seed (default: first configured seed)");
  run->add_option("--variant", run_variant, "ppo_env|rbrl|ours_full|ours_equal|ours_cls|ours_reg");
  run->add_option("--classes", run_classes, "Number of rating classes");
  run->add_option("--rating-mode", run_mode, "synthetic|http")
      ->check(CLI::IsMember({"synthetic", "http"}));
  run->add_option("--bind", run_host, "Rating server address (http mode)");
  run->add_option("--port", run_port, "Rating server port (http mode)");
  run->add_option("--output-dir", run_output, "Directory for run artifacts");
  run->add_option("--metrics", run_metrics, "JSONL metrics file");

  // matrix
  auto* matrix = app.add_subcommand("matrix", "Run every config x seed and summarize");
  fs::path matrix_config;
  int parallel = 1;
  fs::path matrix_out = "results";
  matrix->add_option("--config", matrix_config, "Config file")
      ->required()
      ->check(CLI::ExistingFile);
  matrix->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  matrix->add_option("--out", matrix_out, "Directory for summary, raw and curve CSVs");

  // curves
  auto* curves = app.add_subcommand("curves", "Write per-environment curve CSVs");
  fs::path summary_path;
  std::optional<fs::path> curves_out;
  curves->add_option("--summary", summary_path, "summary.csv from matrix")
      ->required()
      ->check(CLI::ExistingFile);
  curves->add_option("--out", curves_out, "Output directory (default: next to summary)");

  // trace
  auto* trace = app.add_subcommand("trace", "Print one episode's states as a JSON array");
  std::string trace_env = "point-mass";
  std::uint64_t trace_seed = 0;
  std::optional<fs::path> trace_policy;
  trace->add_option("--env", trace_env, "Environment name");
  trace->add_option("--seed", trace_seed, "Episode seed");
  trace->add_option("--policy", trace_policy, "policy.json from a run (default: zero action)")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto entries = read_config_entries(run_config);
      if (run_variant) entries["variant"] = *run_variant;
      if (run_classes) entries["n_classes"] = std::to_string(*run_classes);
      if (run_mode) entries["rating_mode"] = *run_mode;
      if (run_host) entries["http_host"] = *run_host;
      if (run_port) entries["http_port"] = std::to_string(*run_port);
      if (run_output) entries["output_dir"] = *run_output;
      const ExperimentConfig config = make_config(entries);
      const std::uint64_t seed = run_seed.value_or(config.seeds.front());

      std::optional<JsonlMetricsSink> sink;
      if (run_metrics.empty() && !config.output_dir.empty()) {
        run_metrics = run_directory(config, seed) / "metrics.jsonl";
      }
      if (!run_metrics.empty()) sink.emplace(run_metrics);
      RunOptions options;
      if (sink) options.sink = &*sink;
      options.on_http_ready = [&](int port) {
        std::printf("rating server on http://%s:%d  (%d ratings needed)\n",
                    config.http_host.c_str(), port, config.n_ratings);
        std::fflush(stdout);
      };
      const RunRecord record = run_experiment(config, seed, options);
      print_record(record);
      return record.failed ? 1 : record.paused ? 3 : 0;
    }

    if (*matrix) {
      const auto configs = expand_configs(read_config_entries(matrix_config));
      fs::create_directories(matrix_out);
      JsonlMetricsSink sink(matrix_out / "metrics.jsonl");
      RunOptions options;
      options.sink = &sink;
      std::size_t runs = 0;
      for (const auto& c : configs) runs += c.seeds.size();
      std::printf("%zu configs, %zu runs, %d in parallel\n", configs.size(), runs, parallel);
      std::fflush(stdout);
      const auto result = run_matrix(configs, parallel, options);
      write_summary_csv(result.summary, matrix_out / "summary.csv");
      write_raw_csv(result.runs, matrix_out / "raw.csv");
      write_runs_csv(result.runs, matrix_out / "runs.csv");
      const auto files = emit_curves(result.summary, matrix_out);
      int failed = 0;
      for (const auto& r : result.runs) {
        if (r.failed || r.paused) {
          ++failed;
          std::printf("run %s seed %llu failed: %s\n", r.config_hash.c_str(),
                      static_cast<unsigned long long>(r.seed), r.diagnostic.c_str());
        }
      }
      std::printf("summary: %s\n", (matrix_out / "summary.csv").string().c_str());
      for (const auto& f : files) std::printf("curves:  %s\n", f.string().c_str());
      return failed == 0 ? 0 : 1;
    }

    if (*curves) {
      const auto rows = read_summary_csv(summary_path);
      const fs::path out = curves_out.value_or(summary_path.parent_path());
      for (const auto& f : emit_curves(rows, out)) std::printf("%s\n", f.string().c_str());
      return 0;
    }

    if (*trace) {
      auto env = envs::make_environment(trace_env);
      std::optional<ppo::GaussianPolicy<float>> policy;
      if (trace_policy) {
        const auto doc = nnet::read_json_file(*trace_policy);
        policy.emplace(ppo::policy_from_json<float>(env->spec(), doc.at("policy")));
      }
      Eigen::VectorXd obs = env->reset(trace_seed);
      Eigen::MatrixXd states(env->spec().horizon + 1, env->spec().state_dim);
      Eigen::Index rows = 0;
      states.row(rows++) = obs.transpose();
      while (!env->episode_over()) {
        const Eigen::VectorXd a =
            policy ? policy->mean_action(obs)
                   : Eigen::VectorXd::Zero(env->spec().action_dim).eval();
        obs = env->step(a).next_state;
        states.row(rows++) = obs.transpose();
      }
      std::cout << segments::matrix_to_json(states.topRows(rows)).dump() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
