#include "fraudrl/run_config.hpp"

#include "fraudrl/errors.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace fraudrl {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("config: unknown key '" + where + it.key() + "'");
  }
}

template <typename T>
void take(const json& obj, const char* key, T& dest, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    dest = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: key '" + where + key + "' has the wrong type");
  }
}

std::string expect_string(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<std::string>();
  } catch (const json::exception&) {
    throw ConfigError("config: key '" + where + key + "' has the wrong type");
  }
}

void apply_synth(const json& obj, SynthConfig& s) {
  reject_unknown(obj,
                 {"rows", "feature_count", "fraud_rate", "separation",
                  "amount_genuine_mean", "amount_fraud_mean", "amount_sigma",
                  "drift_index", "drift_offset"},
                 "data.synth.");
  take(obj, "rows", s.rows, "data.synth.");
  take(obj, "feature_count", s.feature_count, "data.synth.");
  take(obj, "fraud_rate", s.fraud_rate, "data.synth.");
  take(obj, "separation", s.separation, "data.synth.");
  take(obj, "amount_genuine_mean", s.amount_genuine_mean, "data.synth.");
  take(obj, "amount_fraud_mean", s.amount_fraud_mean, "data.synth.");
  take(obj, "amount_sigma", s.amount_sigma, "data.synth.");
  take(obj, "drift_index", s.drift_index, "data.synth.");
  take(obj, "drift_offset", s.drift_offset, "data.synth.");
}

void apply_data(const json& obj, RunConfig& cfg) {
  reject_unknown(obj,
                 {"csv_path", "label_column", "amount_column", "time_column",
                  "categorical_columns", "encoder_smoothing", "synth"},
                 "data.");
  take(obj, "csv_path", cfg.csv_path, "data.");
  take(obj, "label_column", cfg.csv.label_column, "data.");
  take(obj, "amount_column", cfg.csv.amount_column, "data.");
  take(obj, "time_column", cfg.csv.time_column, "data.");
  take(obj, "categorical_columns", cfg.csv.categorical_columns, "data.");
  take(obj, "encoder_smoothing", cfg.encoder_smoothing, "data.");
  if (obj.contains("synth")) apply_synth(obj.at("synth"), cfg.synth);
}

void apply_env(const json& obj, EnvConfig& env) {
  reject_unknown(obj, {"episode_length", "rate_window", "window_mode"}, "env.");
  take(obj, "episode_length", env.episode_length, "env.");
  take(obj, "rate_window", env.rate_window, "env.");
  if (obj.contains("window_mode")) {
    env.window_mode = window_mode_from_string(expect_string(obj, "window_mode", "env."));
  }
}

void apply_reward(const json& obj, RewardConfig& r) {
  reject_unknown(
      obj, {"kind", "alpha", "beta", "balance_scale", "lambda_prime", "lambda_double"},
      "reward.");
  if (obj.contains("kind")) {
    r.kind = reward_kind_from_string(expect_string(obj, "kind", "reward."));
  }
  take(obj, "alpha", r.alpha, "reward.");
  take(obj, "beta", r.beta, "reward.");
  take(obj, "balance_scale", r.balance_scale, "reward.");
  if (obj.contains("lambda_prime") && !obj.at("lambda_prime").is_null()) {
    double value = 0.0;
    take(obj, "lambda_prime", value, "reward.");
    r.lambda_prime = value;
  }
  take(obj, "lambda_double", r.lambda_double, "reward.");
}

void apply_agent(const json& obj, AgentConfig& a) {
  reject_unknown(obj,
                 {"hidden_sizes", "gamma", "learning_rate", "epsilon_start",
                  "epsilon_min", "epsilon_decay", "huber_delta", "replay_capacity",
                  "batch_size", "target_sync_episodes", "max_episodes"},
                 "agent.");
  take(obj, "hidden_sizes", a.hidden_sizes, "agent.");
  take(obj, "gamma", a.gamma, "agent.");
  take(obj, "learning_rate", a.learning_rate, "agent.");
  take(obj, "epsilon_start", a.epsilon_start, "agent.");
  take(obj, "epsilon_min", a.epsilon_min, "agent.");
  take(obj, "epsilon_decay", a.epsilon_decay, "agent.");
  take(obj, "huber_delta", a.huber_delta, "agent.");
  take(obj, "replay_capacity", a.replay_capacity, "agent.");
  take(obj, "batch_size", a.batch_size, "agent.");
  take(obj, "target_sync_episodes", a.target_sync_episodes, "agent.");
  take(obj, "max_episodes", a.max_episodes, "agent.");
}

void apply_baseline(const json& obj, BaselineConfig& b) {
  reject_unknown(obj,
                 {"hidden_sizes", "learning_rate", "batch_size", "max_epochs",
                  "patience", "threshold_grid"},
                 "baseline.");
  take(obj, "hidden_sizes", b.hidden_sizes, "baseline.");
  take(obj, "learning_rate", b.learning_rate, "baseline.");
  take(obj, "batch_size", b.batch_size, "baseline.");
  take(obj, "max_epochs", b.max_epochs, "baseline.");
  take(obj, "patience", b.patience, "baseline.");
  take(obj, "threshold_grid", b.threshold_grid, "baseline.");
}

}  // namespace

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "dqn") return ModelKind::Dqn;
  if (name == "nn") return ModelKind::Nn;
  throw ConfigError("config: unknown model '" + name + "' (expected dqn or nn)");
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::Dqn ? "dqn" : "nn";
}

RunConfig run_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
  reject_unknown(
      doc, {"model", "data", "env", "reward", "agent", "baseline", "seed", "out_dir"},
      "");
  RunConfig cfg;
  if (doc.contains("model")) {
    cfg.model = model_kind_from_string(expect_string(doc, "model", ""));
  }
  if (doc.contains("data")) apply_data(doc.at("data"), cfg);
  if (doc.contains("env")) apply_env(doc.at("env"), cfg.env);
  if (doc.contains("reward")) apply_reward(doc.at("reward"), cfg.reward);
  if (doc.contains("agent")) apply_agent(doc.at("agent"), cfg.agent);
  if (doc.contains("baseline")) apply_baseline(doc.at("baseline"), cfg.baseline);
  take(doc, "seed", cfg.seed, "");
  take(doc, "out_dir", cfg.out_dir, "");
  run_config_validate(cfg);
  return cfg;
}

RunConfig run_config_load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_config_from_json(buf.str());
}

void run_config_validate(const RunConfig& cfg) {
  const auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(std::string("config: ") + msg);
  };
  require(cfg.env.episode_length >= 1, "env.episode_length must be >= 1");
  require(cfg.env.rate_window >= 1, "env.rate_window must be >= 1");
  require(cfg.reward.alpha > 0.0, "reward.alpha must be > 0");
  require(cfg.reward.beta > 0.0, "reward.beta must be > 0");
  require(cfg.reward.balance_scale > 0.0, "reward.balance_scale must be > 0");
  if (cfg.reward.lambda_prime.has_value()) {
    require(*cfg.reward.lambda_prime > 0.0, "reward.lambda_prime must be > 0");
  }
  require(cfg.reward.lambda_double > 0.0, "reward.lambda_double must be > 0");
  require(!cfg.agent.hidden_sizes.empty(), "agent.hidden_sizes must be non-empty");
  for (int h : cfg.agent.hidden_sizes) {
    require(h >= 1, "agent.hidden_sizes entries must be >= 1");
  }
  require(cfg.agent.gamma >= 0.0 && cfg.agent.gamma <= 1.0,
          "agent.gamma must be in [0, 1]");
  require(cfg.agent.learning_rate > 0.0, "agent.learning_rate must be > 0");
  require(cfg.agent.epsilon_min > 0.0, "agent.epsilon_min must be > 0");
  require(cfg.agent.epsilon_start >= cfg.agent.epsilon_min,
          "agent.epsilon_start must be >= agent.epsilon_min");
  require(cfg.agent.epsilon_start <= 1.0, "agent.epsilon_start must be <= 1");
  require(cfg.agent.epsilon_decay >= 0.0, "agent.epsilon_decay must be >= 0");
  require(cfg.agent.huber_delta > 0.0, "agent.huber_delta must be > 0");
  require(cfg.agent.batch_size >= 1, "agent.batch_size must be >= 1");
  require(cfg.agent.replay_capacity >= cfg.agent.batch_size,
          "agent.replay_capacity must be >= agent.batch_size");
  require(cfg.agent.target_sync_episodes >= 1,
          "agent.target_sync_episodes must be >= 1");
  require(cfg.agent.max_episodes >= 0, "agent.max_episodes must be >= 0");
  require(!cfg.baseline.hidden_sizes.empty(), "baseline.hidden_sizes must be non-empty");
  for (int h : cfg.baseline.hidden_sizes) {
    require(h >= 1, "baseline.hidden_sizes entries must be >= 1");
  }
  require(cfg.baseline.learning_rate > 0.0, "baseline.learning_rate must be > 0");
  require(cfg.baseline.batch_size >= 1, "baseline.batch_size must be >= 1");
  require(cfg.baseline.max_epochs >= 1, "baseline.max_epochs must be >= 1");
  require(cfg.baseline.patience >= 1, "baseline.patience must be >= 1");
  require(cfg.baseline.threshold_grid >= 1, "baseline.threshold_grid must be >= 1");
  require(cfg.encoder_smoothing >= 0.0, "data.encoder_smoothing must be >= 0");
  require(!cfg.out_dir.empty(), "out_dir must be non-empty");
  if (cfg.csv_path.empty()) {
    require(cfg.synth.rows >= 10, "data.synth.rows must be >= 10");
    require(cfg.synth.feature_count >= 1, "data.synth.feature_count must be >= 1");
    require(cfg.synth.fraud_rate > 0.0 && cfg.synth.fraud_rate < 1.0,
            "data.synth.fraud_rate must be in (0, 1)");
    require(cfg.synth.amount_sigma >= 0.0, "data.synth.amount_sigma must be >= 0");
    require(cfg.synth.drift_index >= 0, "data.synth.drift_index must be >= 0");
  }
}

std::string resolved_config_json(const RunConfig& cfg) {
  json doc;
  doc["model"] = to_string(cfg.model);
  doc["data"] = {{"csv_path", cfg.csv_path},
                 {"label_column", cfg.csv.label_column},
                 {"amount_column", cfg.csv.amount_column},
                 {"time_column", cfg.csv.time_column},
                 {"categorical_columns", cfg.csv.categorical_columns},
                 {"encoder_smoothing", cfg.encoder_smoothing},
                 {"synth",
                  {{"rows", cfg.synth.rows},
                   {"feature_count", cfg.synth.feature_count},
                   {"fraud_rate", cfg.synth.fraud_rate},
                   {"separation", cfg.synth.separation},
                   {"amount_genuine_mean", cfg.synth.amount_genuine_mean},
                   {"amount_fraud_mean", cfg.synth.amount_fraud_mean},
                   {"amount_sigma", cfg.synth.amount_sigma},
                   {"drift_index", cfg.synth.drift_index},
                   {"drift_offset", cfg.synth.drift_offset}}}};
  doc["env"] = {{"episode_length", cfg.env.episode_length},
                {"rate_window", cfg.env.rate_window},
                {"window_mode", to_string(cfg.env.window_mode)}};
  doc["reward"] = {{"kind", to_string(cfg.reward.kind)},
                   {"alpha", cfg.reward.alpha},
                   {"beta", cfg.reward.beta},
                   {"balance_scale", cfg.reward.balance_scale},
                   {"lambda_double", cfg.reward.lambda_double}};
  if (cfg.reward.lambda_prime.has_value()) {
    doc["reward"]["lambda_prime"] = *cfg.reward.lambda_prime;
  } else {
    doc["reward"]["lambda_prime"] = nullptr;
  }
  doc["agent"] = {{"hidden_sizes", cfg.agent.hidden_sizes},
                  {"gamma", cfg.agent.gamma},
                  {"learning_rate", cfg.agent.learning_rate},
                  {"epsilon_start", cfg.agent.epsilon_start},
                  {"epsilon_min", cfg.agent.epsilon_min},
                  {"epsilon_decay", cfg.agent.epsilon_decay},
                  {"huber_delta", cfg.agent.huber_delta},
                  {"replay_capacity", cfg.agent.replay_capacity},
                  {"batch_size", cfg.agent.batch_size},
                  {"target_sync_episodes", cfg.agent.target_sync_episodes},
                  {"max_episodes", cfg.agent.max_episodes}};
  doc["baseline"] = {{"hidden_sizes", cfg.baseline.hidden_sizes},
                     {"learning_rate", cfg.baseline.learning_rate},
                     {"batch_size", cfg.baseline.batch_size},
                     {"max_epochs", cfg.baseline.max_epochs},
                     {"patience", cfg.baseline.patience},
                     {"threshold_grid", cfg.baseline.threshold_grid}};
  doc["seed"] = cfg.seed;
  doc["out_dir"] = cfg.out_dir;
  return doc.dump(2) + "\n";
}

}  // namespace fraudrl
