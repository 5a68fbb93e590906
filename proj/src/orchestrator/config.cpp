#include "ratelab/orchestrator/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ratelab/envs/environment.hpp"
#include "ratelab/segments/rating.hpp"

namespace ratelab::orchestrator {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::ppo_env: return "ppo_env";
    case Variant::rbrl: return "rbrl";
    case Variant::ours_full: return "ours_full";
    case Variant::ours_equal: return "ours_equal";
    case Variant::ours_cls: return "ours_cls";
    case Variant::ours_reg: return "ours_reg";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::ppo_env, Variant::rbrl, Variant::ours_full,
                    Variant::ours_equal, Variant::ours_cls, Variant::ours_reg}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

std::optional<reward::LossVariant> loss_variant(Variant variant) {
  switch (variant) {
    case Variant::ppo_env: return std::nullopt;
    case Variant::rbrl: return reward::LossVariant::rbrl;
    case Variant::ours_full: return reward::LossVariant::full;
    case Variant::ours_equal: return reward::LossVariant::equal;
    case Variant::ours_cls: return reward::LossVariant::cls_only;
    case Variant::ours_reg: return reward::LossVariant::reg_only;
  }
  return std::nullopt;
}

std::string_view to_string(RatingMode mode) {
  return mode == RatingMode::synthetic ? "synthetic" : "http";
}

RatingMode parse_rating_mode(std::string_view name) {
  if (name == "synthetic") return RatingMode::synthetic;
  if (name == "http") return RatingMode::http;
  throw ConfigError("unknown rating_mode '" + std::string(name) + "'");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos
                                           ? std::string_view::npos
                                           : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

template <typename N>
N parse_number(const std::string& key, const std::string& text) {
  N value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("bad value for " + key + ": '" + text + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename N>
std::string join(const std::vector<N>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<N>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

template <typename N>
std::vector<N> parse_list(const std::string& key, const std::string& text) {
  std::vector<N> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<N>(key, item));
  return out;
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  /// Ignored (and unhashed) for ppo_env.
  bool rating = false;
  /// Part of the config hash.
  bool hashed = true;
};

#define RATELAB_INT(name, member, rating)                                          \
  Field {                                                                          \
    name, [](ExperimentConfig& c, const std::string& v) {                         \
      c.member = parse_number<decltype(c.member)>(name, v);                      \
    },                                                                             \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }, rating \
  }
#define RATELAB_REAL(name, member, rating)                                         \
  Field {                                                                          \
    name, [](ExperimentConfig& c, const std::string& v) {                         \
      c.member = parse_number<double>(name, v);                                    \
    },                                                                             \
        [](const ExperimentConfig& c) { return format_double(c.member); }, rating  \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"env", [](ExperimentConfig& c, const std::string& v) { c.env = v; },
       [](const ExperimentConfig& c) { return c.env; }},
      {"variant",
       [](ExperimentConfig& c, const std::string& v) { c.variant = parse_variant(v); },
       [](const ExperimentConfig& c) { return std::string(to_string(c.variant)); }},
      RATELAB_INT("n_classes", n_classes, true),
      RATELAB_INT("n_ratings", n_ratings, true),
      RATELAB_INT("total_steps", total_steps, false),
      RATELAB_INT("segment_length", segment_length, true),
      RATELAB_REAL("segment_action_hold", segment_action_hold, true),
      RATELAB_REAL("kappa", kappa, true),
      RATELAB_REAL("alpha", alpha, true),
      {"seeds",
       [](ExperimentConfig& c, const std::string& v) {
         c.seeds = parse_list<std::uint64_t>("seeds", v);
       },
       [](const ExperimentConfig& c) { return join(c.seeds); }, false, false},
      {"rating_mode",
       [](ExperimentConfig& c, const std::string& v) {
         c.rating_mode = parse_rating_mode(v);
       },
       [](const ExperimentConfig& c) { return std::string(to_string(c.rating_mode)); },
       true},
      {"synthetic_boundaries",
       [](ExperimentConfig& c, const std::string& v) {
         c.synthetic_boundaries = parse_list<double>("synthetic_boundaries", v);
       },
       [](const ExperimentConfig& c) { return join(c.synthetic_boundaries); }, true},
      RATELAB_REAL("synthetic_top_fraction", synthetic_top_fraction, true),
      {"hidden_layers",
       [](ExperimentConfig& c, const std::string& v) {
         c.hidden_layers = parse_list<int>("hidden_layers", v);
       },
       [](const ExperimentConfig& c) { return join(c.hidden_layers); }},
      RATELAB_REAL("ppo_clip", ppo.clip, false),
      RATELAB_REAL("ppo_learning_rate", ppo.learning_rate, false),
      RATELAB_REAL("ppo_gamma", ppo.gamma, false),
      RATELAB_REAL("ppo_gae_lambda", ppo.gae_lambda, false),
      RATELAB_INT("ppo_rollout_length", ppo.rollout_length, false),
      RATELAB_INT("ppo_epochs", ppo.epochs, false),
      RATELAB_INT("ppo_minibatch_size", ppo.minibatch_size, false),
      RATELAB_REAL("ppo_value_coef", ppo.value_coef, false),
      RATELAB_REAL("ppo_entropy_coef", ppo.entropy_coef, false),
      RATELAB_REAL("ppo_max_grad_norm", ppo.max_grad_norm, false),
      RATELAB_REAL("initial_log_std", initial_log_std, false),
      RATELAB_INT("reward_max_epochs", reward_max_epochs, true),
      RATELAB_INT("reward_batch_size", reward_batch_size, true),
      RATELAB_REAL("reward_learning_rate", reward_learning_rate, true),
      RATELAB_REAL("uncertainty_learning_rate", uncertainty_learning_rate, true),
      RATELAB_INT("reward_patience", reward_patience, true),
      RATELAB_REAL("reward_min_improvement", reward_min_improvement, true),
      {"reward_early_stopping",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "true") {
           c.reward_early_stopping = true;
         } else if (v == "false") {
           c.reward_early_stopping = false;
         } else {
           throw ConfigError("reward_early_stopping: expected true or false, got '" + v + "'");
         }
       },
       [](const ExperimentConfig& c) {
         return std::string(c.reward_early_stopping ? "true" : "false");
       },
       true},
      RATELAB_INT("reward_retrain_interval", reward_retrain_interval, true),
      RATELAB_INT("reward_retrain_ratings", reward_retrain_ratings, true),
      RATELAB_REAL("log_lambda_limit", log_lambda_limit, true),
      RATELAB_INT("eval_interval", eval_interval, false),
      RATELAB_INT("eval_episodes", eval_episodes, false),
      {"http_host", [](ExperimentConfig& c, const std::string& v) { c.http_host = v; },
       [](const ExperimentConfig& c) { return c.http_host; }, true, false},
      {"http_port",
       [](ExperimentConfig& c, const std::string& v) {
         c.http_port = parse_number<int>("http_port", v);
       },
       [](const ExperimentConfig& c) { return std::to_string(c.http_port); }, true, false},
      {"http_timeout",
       [](ExperimentConfig& c, const std::string& v) {
         c.http_timeout = parse_number<double>("http_timeout", v);
       },
       [](const ExperimentConfig& c) { return format_double(c.http_timeout); }, true,
       false},
      {"lease_seconds",
       [](ExperimentConfig& c, const std::string& v) {
         c.lease_seconds = parse_number<double>("lease_seconds", v);
       },
       [](const ExperimentConfig& c) { return format_double(c.lease_seconds); }, true,
       false},
      {"output_dir",
       [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
       [](const ExperimentConfig& c) { return c.output_dir.string(); }, false, false},
  };
  return table;
}

#undef RATELAB_INT
#undef RATELAB_REAL

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void validate(const ExperimentConfig& c) {
  const auto names = envs::environment_names();
  if (std::find(names.begin(), names.end(), c.env) == names.end()) {
    throw ConfigError("unknown env '" + c.env + "'");
  }
  if (c.total_steps < 1) throw ConfigError("total_steps must be positive");
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  if (c.hidden_layers.empty()) throw ConfigError("hidden_layers must not be empty");
  for (int w : c.hidden_layers) {
    if (w < 1) throw ConfigError("hidden layer widths must be positive");
  }
  if (c.ppo.rollout_length < 1 || c.ppo.epochs < 1 || c.ppo.minibatch_size < 1) {
    throw ConfigError("ppo rollout, epochs and minibatch must be positive");
  }
  if (c.ppo.clip <= 0.0 || c.ppo.learning_rate <= 0.0) {
    throw ConfigError("ppo clip and learning rate must be positive");
  }
  if (c.eval_interval < 1 || c.eval_episodes < 1) {
    throw ConfigError("eval_interval and eval_episodes must be positive");
  }
  if (c.variant == Variant::ppo_env) return;
  if (c.n_classes < segments::RatingDataset::kMinClasses ||
      c.n_classes > segments::RatingDataset::kMaxClasses) {
    throw ConfigError("n_classes must be in [2, 6]");
  }
  if (c.n_ratings < c.n_classes) throw ConfigError("n_ratings must be at least n_classes");
  if (c.segment_length < 1) throw ConfigError("segment_length must be positive");
  if (c.kappa <= 0.0 || c.alpha <= 0.0) throw ConfigError("kappa and alpha must be positive");
  if (!c.synthetic_boundaries.empty()) {
    if (static_cast<int>(c.synthetic_boundaries.size()) != c.n_classes - 1) {
      throw ConfigError("synthetic_boundaries needs n_classes - 1 edges");
    }
    for (std::size_t i = 1; i < c.synthetic_boundaries.size(); ++i) {
      if (!(c.synthetic_boundaries[i - 1] < c.synthetic_boundaries[i])) {
        throw ConfigError("synthetic_boundaries must increase strictly");
      }
    }
  }
  if (c.reward_max_epochs < 1 || c.reward_batch_size < 1 || c.reward_patience < 1) {
    throw ConfigError("reward epochs, batch size and patience must be positive");
  }
  if (c.reward_retrain_interval < 0 || c.reward_retrain_ratings < 1) {
    throw ConfigError("reward_retrain_interval must be >= 0 and reward_retrain_ratings >= 1");
  }
  if (c.reward_retrain_interval > 0 && c.rating_mode != RatingMode::synthetic &&
      c.variant != Variant::ppo_env) {
    throw ConfigError("reward retraining needs rating_mode = synthetic");
  }
  if (!(c.segment_action_hold >= 0.0 && c.segment_action_hold < 1.0)) {
    throw ConfigError("segment_action_hold must be in [0, 1)");
  }
}

ConfigEntries parse_config_entries(std::string_view text) {
  ConfigEntries entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const auto where = "line " + std::to_string(number) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (find_field(key) == nullptr) throw ConfigError(where + "unknown key '" + key + "'");
    if (!entries.emplace(key, value).second) {
      throw ConfigError(where + "repeated key '" + key + "'");
    }
  }
  return entries;
}

ConfigEntries read_config_entries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_entries(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<ExperimentConfig> expand_configs(const ConfigEntries& entries) {
  ExperimentConfig base;
  static const std::set<std::string> expandable{"env", "variant", "n_classes"};
  for (const auto& [key, value] : entries) {
    if (expandable.count(key) != 0) continue;
    const Field* f = find_field(key);
    if (f == nullptr) throw ConfigError("unknown key '" + key + "'");
    f->set(base, value);
  }
  auto values_of = [&](const std::string& key) {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::vector<std::string>{find_field(key)->get(base)};
    auto items = split_list(it->second);
    if (items.empty()) throw ConfigError(key + " must not be empty");
    return items;
  };

  std::vector<ExperimentConfig> out;
  std::set<std::string> seen;
  for (const auto& env : values_of("env")) {
    for (const auto& variant : values_of("variant")) {
      for (const auto& classes : values_of("n_classes")) {
        ExperimentConfig c = base;
        find_field("env")->set(c, env);
        find_field("variant")->set(c, variant);
        find_field("n_classes")->set(c, classes);
        validate(c);
        if (seen.insert(config_hash(c)).second) out.push_back(std::move(c));
      }
    }
  }
  return out;
}

ExperimentConfig make_config(const ConfigEntries& entries) {
  auto configs = expand_configs(entries);
  if (configs.size() != 1) {
    throw ConfigError("config expands to " + std::to_string(configs.size()) +
                      " experiments; pin env, variant and n_classes");
  }
  return configs.front();
}

std::string dump_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::string canonical;
  const bool baseline = config.variant == Variant::ppo_env;
  for (const auto& f : fields()) {
    if (!f.hashed || (baseline && f.rating)) continue;
    canonical += f.key + "=" + f.get(config) + "\n";
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical)));
  return buf;
}

}  // namespace ratelab::orchestrator
