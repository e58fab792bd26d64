#pragma once

#include "fraudrl/environment.hpp"
#include "fraudrl/metrics.hpp"
#include "fraudrl/neuralnet.hpp"
#include "fraudrl/rewards.hpp"
#include "fraudrl/rng.hpp"
#include "fraudrl/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace fraudrl {

struct Experience {
  Vector state;
  int action = 0;
  double reward = 0.0;
  Vector next_state;      // empty at end of stream
  bool terminal = false;  // true only at end of stream
};

// Fixed-capacity FIFO buffer with uniform without-replacement sampling.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Experience exp);
  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  // i-th oldest stored experience.
  const Experience& at(std::size_t i) const { return buffer_[(head_ + i) % buffer_.size()]; }

  // Samples batch_size distinct experiences; throws if fewer are stored.
  std::vector<const Experience*> sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Experience> buffer_;
  std::size_t head_ = 0;  // index of the oldest element once full
};

struct AgentConfig {
  std::vector<int> hidden_sizes = {128, 128};
  double gamma = 0.99;
  double learning_rate = 0.005;
  double epsilon_start = 1.0;
  double epsilon_min = 0.01;
  double epsilon_decay = 8e-6;  // linear decrement per decision
  double huber_delta = 1.0;
  std::size_t replay_capacity = 75000;
  std::size_t batch_size = 32;
  std::int64_t target_sync_episodes = 25;
  std::int64_t max_episodes = 0;  // 0 = run the whole stream
};

// Exploration probability after `step` decisions:
// max(epsilon_min, epsilon_start - decay * step).
double epsilon_at(std::uint64_t step, const AgentConfig& config);

struct TrainEpisodeRow {
  std::int64_t episode = 0;
  double reward_sum = 0.0;
  double mean_loss = 0.0;  // over updates within the episode; 0 if none ran
  double dr = 0.0;         // rates at episode end
  double fr = 0.0;
  double epsilon = 0.0;    // exploration rate after the episode's last decision
};

struct TrainLog {
  std::vector<TrainEpisodeRow> rows;
  std::int64_t total_steps = 0;
  std::int64_t total_updates = 0;
  std::int64_t target_syncs = 0;
};

std::string train_log_to_csv(const TrainLog& log);

// Q-learning over a StreamEnv: two actions (0 approve, 1 decline),
// epsilon-greedy behaviour, replay-batch Huber updates against a
// periodically synced target network.
class DqnAgent {
 public:
  DqnAgent(int state_size, const AgentConfig& config, std::uint64_t seed);

  // Epsilon-greedy pick; advances the exploration schedule by one step.
  int select_action(const EnvState& state);
  // Greedy pick (ties go to approve); does not touch the schedule.
  int greedy_action(const EnvState& state) const;

  void remember(Experience exp);
  // One batch update against the target network; no-op (nullopt) while the
  // buffer holds fewer than batch_size experiences.
  std::optional<double> replay_update();
  void sync_target();

  // Full training pass over the environment's stream.
  TrainLog train(StreamEnv& env, const RewardConfig& reward,
                 const std::function<void(const TrainEpisodeRow&)>& on_episode = {});

  const Mlp& online_net() const { return online_; }
  const Mlp& target_net() const { return target_; }
  const AdamState& adam_state() const { return adam_; }
  std::uint64_t action_steps() const { return action_steps_; }
  double current_epsilon() const;
  const ReplayMemory& memory() const { return memory_; }
  const AgentConfig& config() const { return config_; }

  void set_online_net(const Mlp& net);  // for resuming from a checkpoint

 private:
  AgentConfig config_;
  Mlp online_;
  Mlp target_;
  AdamState adam_;
  ReplayMemory memory_;
  Rng rng_;
  std::uint64_t action_steps_ = 0;
};

// Greedy rollout of a policy network over a fresh environment pass: no
// exploration, no learning, no memory writes.
struct EvalResult {
  std::vector<int> actions;
  std::vector<int> labels;
  std::vector<double> amounts;
  std::vector<EpisodeTraceRow> trace;
  double reward_sum = 0.0;
};

EvalResult evaluate_greedy(const Mlp& net, StreamEnv& env, const RewardConfig& reward);

}  // namespace fraudrl
