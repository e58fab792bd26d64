#include "fraudrl/pipeline.hpp"

#include "fraudrl/errors.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace fraudrl {

namespace {

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("failed while writing '" + path + "'");
}

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

std::string actions_to_csv(const TransactionList& split, const std::vector<int>& actions) {
  if (actions.size() != split.size()) {
    throw ShapeError("actions.csv: one action per test transaction expected");
  }
  std::ostringstream out;
  out << "index,action,label,amount\n";
  for (std::size_t i = 0; i < split.size(); ++i) {
    out << split[i].index << ',' << actions[i] << ',' << split[i].label << ','
        << format_double(split[i].amount) << '\n';
  }
  return out.str();
}

std::string curve_to_csv(const BaselineTrainLog& log) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < log.train_loss.size(); ++e) {
    out << e << ',' << format_double(log.train_loss[e]) << ','
        << format_double(log.val_loss[e]) << '\n';
  }
  return out.str();
}

void write_eval_artifacts(const std::string& out_dir, const TransactionList& split,
                          const std::vector<int>& actions,
                          const std::vector<EpisodeTraceRow>& trace,
                          const MetricsReport& report) {
  write_text(join(out_dir, "metrics.json"), metrics_to_json(report));
  write_text(join(out_dir, "trace.csv"), trace_to_csv(trace));
  write_text(join(out_dir, "actions.csv"), actions_to_csv(split, actions));
}

void log_report(std::ostream& progress, const MetricsReport& r) {
  progress << "test: precision=" << format_double(r.precision)
           << " recall=" << format_double(r.recall) << " f1=" << format_double(r.f1)
           << " approval_pct=" << format_double(r.approval_pct)
           << " fraud_bps=" << format_double(r.fraud_bps) << "\n";
}

std::vector<int> split_labels(const TransactionList& split) {
  std::vector<int> labels;
  labels.reserve(split.size());
  for (const Transaction& t : split) labels.push_back(t.label);
  return labels;
}

std::vector<double> split_amounts(const TransactionList& split) {
  std::vector<double> amounts;
  amounts.reserve(split.size());
  for (const Transaction& t : split) amounts.push_back(t.amount);
  return amounts;
}

std::string run_slug(const RunConfig& config) {
  if (config.model == ModelKind::Nn) return "nn";
  return "dqn_" + to_string(config.reward.kind);
}

}  // namespace

PreparedData prepare_dataset(const RunConfig& config, std::ostream* progress) {
  PrepareConfig pc;
  pc.csv = config.csv;
  pc.encoder_smoothing = config.encoder_smoothing;
  if (config.csv_path.empty()) {
    return prepare(synth_generate(config.synth, config.seed), pc);
  }
  const LoadResult loaded = load_csv(config.csv_path, config.csv);
  if (progress && !loaded.rejected.empty()) {
    const RowError& first = loaded.rejected.front();
    *progress << "dropped " << loaded.rejected.size() << " malformed row(s); first: row "
              << first.row << ", column '" << first.column << "': " << first.message
              << "\n";
  }
  return prepare(loaded.table, pc);
}

RewardConfig resolve_reward(const RewardConfig& reward, const TransactionList& train) {
  RewardConfig r = reward;
  if (r.kind == RewardKind::RPrime && !r.lambda_prime.has_value()) {
    const ImbalanceStats stats = imbalance_ratio(train);
    if (stats.fraud_count == 0) {
      throw InputError(
          "cannot derive the genuine-class weight: no fraud rows in the training split");
    }
    r.lambda_prime = stats.ratio;
  }
  return r;
}

Matrix features_matrix(const TransactionList& split) {
  if (split.empty()) throw InputError("features_matrix: empty split");
  const Eigen::Index d = split.front().features.size();
  Matrix x(static_cast<Eigen::Index>(split.size()), d);
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i].features.size() != d) {
      throw ShapeError("features_matrix: ragged feature vectors");
    }
    x.row(static_cast<Eigen::Index>(i)) = split[i].features.transpose();
  }
  return x;
}

Vector labels_vector(const TransactionList& split) {
  Vector y(static_cast<Eigen::Index>(split.size()));
  for (std::size_t i = 0; i < split.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = static_cast<double>(split[i].label);
  }
  return y;
}

TrainArtifacts run_train(const RunConfig& config, std::ostream& progress) {
  run_config_validate(config);
  fs::create_directories(config.out_dir);
  const PreparedData data = prepare_dataset(config, &progress);

  RunConfig resolved = config;
  resolved.reward = resolve_reward(config.reward, data.train);
  write_text(join(config.out_dir, "resolved_config.json"), resolved_config_json(resolved));

  progress << "prepared " << data.train.size() << "/" << data.val.size() << "/"
           << data.test.size() << " train/val/test rows, " << data.feature_names.size()
           << " features\n";

  TrainArtifacts art;
  art.checkpoint_path = join(config.out_dir, "checkpoint.json");

  if (config.model == ModelKind::Dqn) {
    StreamEnv train_env(data.train, config.env);
    std::int64_t planned = train_env.episode_count();
    if (config.agent.max_episodes > 0) {
      planned = std::min(planned, config.agent.max_episodes);
    }
    const int state_size = static_cast<int>(data.feature_names.size()) + 2;
    DqnAgent agent(state_size, config.agent, config.seed);
    art.agent_log =
        agent.train(train_env, resolved.reward, [&](const TrainEpisodeRow& row) {
          if ((row.episode + 1) % 25 == 0 || row.episode + 1 == planned) {
            progress << "episode " << row.episode + 1 << "/" << planned
                     << " reward_sum=" << format_double(row.reward_sum)
                     << " mean_loss=" << format_double(row.mean_loss)
                     << " epsilon=" << format_double(row.epsilon) << "\n";
          }
        });
    write_text(join(config.out_dir, "train_log.csv"), train_log_to_csv(art.agent_log));
    checkpoint_save(art.checkpoint_path, agent.online_net(), &agent.adam_state());

    StreamEnv test_env(data.test, config.env);
    const EvalResult ev = evaluate_greedy(agent.online_net(), test_env, resolved.reward);
    art.test_metrics = make_report(ev.actions, ev.labels, ev.amounts);
    write_eval_artifacts(config.out_dir, data.test, ev.actions, ev.trace,
                         art.test_metrics);
  } else {
    const Matrix train_x = features_matrix(data.train);
    const Vector train_y = labels_vector(data.train);
    const Matrix val_x = features_matrix(data.val);
    const Vector val_y = labels_vector(data.val);
    BaselineModel model = train_baseline(train_x, train_y, val_x, val_y, config.baseline,
                                         config.seed, &art.curve);
    progress << "baseline stopped after " << art.curve.train_loss.size()
             << " epoch(s); kept epoch " << art.curve.best_epoch
             << ", threshold=" << format_double(model.threshold) << "\n";
    write_text(join(config.out_dir, "curve.csv"), curve_to_csv(art.curve));
    checkpoint_save(art.checkpoint_path, model.net, nullptr, "sigmoid", model.threshold);

    const std::vector<int> actions = predict_baseline(model, features_matrix(data.test));
    const std::vector<int> labels = split_labels(data.test);
    art.test_metrics = make_report(actions, labels, split_amounts(data.test));
    write_eval_artifacts(config.out_dir, data.test, actions,
                         episode_trace(actions, labels, config.env), art.test_metrics);
  }

  log_report(progress, art.test_metrics);
  return art;
}

MetricsReport run_eval(const RunConfig& config, const std::string& checkpoint_path,
                       std::ostream& progress) {
  run_config_validate(config);
  fs::create_directories(config.out_dir);
  const PreparedData data = prepare_dataset(config, &progress);
  const Checkpoint ckpt = checkpoint_load(checkpoint_path);
  const int d = static_cast<int>(data.feature_names.size());

  MetricsReport report;
  if (ckpt.head == "sigmoid") {
    if (ckpt.net.input_size() != d) {
      throw CheckpointError("checkpoint expects " + std::to_string(ckpt.net.input_size()) +
                            " features but the dataset has " + std::to_string(d));
    }
    BaselineModel model{ckpt.net, ckpt.threshold.value_or(0.5)};
    const std::vector<int> actions = predict_baseline(model, features_matrix(data.test));
    const std::vector<int> labels = split_labels(data.test);
    report = make_report(actions, labels, split_amounts(data.test));
    write_eval_artifacts(config.out_dir, data.test, actions,
                         episode_trace(actions, labels, config.env), report);
  } else {
    if (ckpt.net.input_size() != d + 2) {
      throw CheckpointError("checkpoint expects state size " +
                            std::to_string(ckpt.net.input_size()) +
                            " but the dataset produces " + std::to_string(d + 2));
    }
    const RewardConfig reward = resolve_reward(config.reward, data.train);
    StreamEnv env(data.test, config.env);
    const EvalResult ev = evaluate_greedy(ckpt.net, env, reward);
    report = make_report(ev.actions, ev.labels, ev.amounts);
    write_eval_artifacts(config.out_dir, data.test, ev.actions, ev.trace, report);
  }

  log_report(progress, report);
  return report;
}

std::string compare_label(const RunConfig& config) {
  if (config.model == ModelKind::Nn) return "NN";
  switch (config.reward.kind) {
    case RewardKind::RPrime:
      return "DQNR'";
    case RewardKind::RDouble:
      return "DQNR''";
    case RewardKind::Combined:
    default:
      return "DQNR";
  }
}

std::vector<CompareRow> run_compare(const std::vector<RunConfig>& configs,
                                    const std::string& out_dir, std::ostream& progress) {
  if (configs.empty()) throw ConfigError("compare: need at least one run config");
  if (out_dir.empty()) throw ConfigError("compare: out_dir must be non-empty");
  fs::create_directories(out_dir);

  std::vector<CompareRow> rows;
  std::map<std::string, int> used;
  for (const RunConfig& base : configs) {
    RunConfig cfg = base;
    std::string slug = run_slug(cfg);
    const int repeat = used[slug]++;
    if (repeat > 0) slug += "_" + std::to_string(repeat);
    cfg.out_dir = (fs::path(out_dir) / slug).string();
    const std::string label = compare_label(cfg);
    progress << "[" << label << "] -> " << cfg.out_dir << "\n";
    const TrainArtifacts art = run_train(cfg, progress);
    rows.push_back({label, art.test_metrics});
  }

  std::ostringstream csv;
  csv << "model,precision,recall,f1,approval_pct,fraud_bps,genuine_approved,"
         "genuine_declined,fraud_approved,fraud_declined\n";
  for (const CompareRow& row : rows) {
    const MetricsReport& m = row.metrics;
    csv << row.label << ',' << format_double(m.precision) << ','
        << format_double(m.recall) << ',' << format_double(m.f1) << ','
        << format_double(m.approval_pct) << ',' << format_double(m.fraud_bps) << ','
        << format_double(m.money.genuine_approved) << ','
        << format_double(m.money.genuine_declined) << ','
        << format_double(m.money.fraud_approved) << ','
        << format_double(m.money.fraud_declined) << '\n';
  }
  write_text(join(out_dir, "compare.csv"), csv.str());
  return rows;
}

std::vector<SweepPoint> run_sweep_beta(const RunConfig& config,
                                       const std::vector<double>& betas,
                                       std::ostream& progress) {
  if (betas.empty()) throw ConfigError("sweep: need at least one beta");
  if (config.model != ModelKind::Dqn) {
    throw ConfigError("sweep: only the dqn model sweeps beta");
  }
  if (config.reward.kind != RewardKind::Combined) {
    throw ConfigError("sweep: beta only enters the combined reward");
  }
  for (double b : betas) {
    if (!(b > 0.0)) throw ConfigError("sweep: every beta must be > 0");
  }
  run_config_validate(config);
  fs::create_directories(config.out_dir);

  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    RunConfig cfg = config;
    cfg.reward.beta = betas[i];
    cfg.seed = config.seed + i;
    cfg.out_dir =
        (fs::path(config.out_dir) / ("beta_" + format_double(betas[i]))).string();
    progress << "[beta=" << format_double(betas[i]) << "] seed " << cfg.seed << " -> "
             << cfg.out_dir << "\n";
    const TrainArtifacts art = run_train(cfg, progress);
    points.push_back({betas[i], cfg.seed, art.test_metrics});
  }

  std::ostringstream csv;
  csv << "beta,seed,precision,recall,f1,approval_pct,fraud_bps\n";
  for (const SweepPoint& p : points) {
    csv << format_double(p.beta) << ',' << p.seed << ','
        << format_double(p.metrics.precision) << ',' << format_double(p.metrics.recall)
        << ',' << format_double(p.metrics.f1) << ','
        << format_double(p.metrics.approval_pct) << ','
        << format_double(p.metrics.fraud_bps) << '\n';
  }
  write_text(join(config.out_dir, "sweep.csv"), csv.str());
  return points;
}

void run_synth(const RunConfig& config, const std::string& path) {
  if (path.empty()) throw ConfigError("synth: output path must be non-empty");
  const RawTable table = synth_generate(config.synth, config.seed);
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_csv(path, table);
}

}  // namespace fraudrl
