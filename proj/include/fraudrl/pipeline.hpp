#pragma once

#include "fraudrl/agent.hpp"
#include "fraudrl/baseline.hpp"
#include "fraudrl/data.hpp"
#include "fraudrl/metrics.hpp"
#include "fraudrl/run_config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fraudrl {

// Loads (or synthesizes) the dataset named by the config and prepares the
// splits. Reports dropped CSV rows to `progress` when one is given.
PreparedData prepare_dataset(const RunConfig& config, std::ostream* progress = nullptr);

// Fills reward.lambda_prime from the training split's class imbalance ratio
// when the config left it unset.
RewardConfig resolve_reward(const RewardConfig& reward, const TransactionList& train);

// Feature matrix / label vector views of a prepared split (the supervised
// baseline trains on these; it never sees the rate features).
Matrix features_matrix(const TransactionList& split);
Vector labels_vector(const TransactionList& split);

struct TrainArtifacts {
  TrainLog agent_log;      // filled for model = dqn
  BaselineTrainLog curve;  // filled for model = nn
  MetricsReport test_metrics;
  std::string checkpoint_path;
};

// Trains the configured model on the train split and evaluates it on the
// test split. Writes checkpoint.json, resolved_config.json, metrics.json,
// trace.csv and actions.csv under config.out_dir, plus train_log.csv (dqn)
// or curve.csv (nn).
TrainArtifacts run_train(const RunConfig& config, std::ostream& progress);

// Evaluates a saved checkpoint on the test split (dispatching on its output
// head); writes metrics.json, trace.csv and actions.csv under config.out_dir.
MetricsReport run_eval(const RunConfig& config, const std::string& checkpoint_path,
                       std::ostream& progress);

struct CompareRow {
  std::string label;  // DQNR / DQNR' / DQNR'' / NN
  MetricsReport metrics;
};

// Row label for a run: the model, qualified by the reward driving it.
std::string compare_label(const RunConfig& config);

// Trains every config and collects test metrics side by side. Writes
// compare.csv under out_dir and full per-run artifacts under out_dir/<slug>/.
std::vector<CompareRow> run_compare(const std::vector<RunConfig>& configs,
                                    const std::string& out_dir, std::ostream& progress);

struct SweepPoint {
  double beta = 0.0;
  std::uint64_t seed = 0;
  MetricsReport metrics;
};

// Re-trains the agent across beta values for the balance term, seeding run i
// with config.seed + i. Writes sweep.csv under config.out_dir and per-run
// artifacts under config.out_dir/beta_<value>/.
std::vector<SweepPoint> run_sweep_beta(const RunConfig& config,
                                       const std::vector<double>& betas,
                                       std::ostream& progress);

// Writes the synthetic stream named by the config to a CSV.
void run_synth(const RunConfig& config, const std::string& path);

}  // namespace fraudrl
