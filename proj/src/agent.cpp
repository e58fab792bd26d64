#include "fraudrl/agent.hpp"

#include "fraudrl/errors.hpp"

#include <algorithm>
#include <sstream>

namespace fraudrl {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be >= 1");
  buffer_.reserve(std::min<std::size_t>(capacity, 1u << 16));
}

void ReplayMemory::push(Experience exp) {
  if (buffer_.size() < capacity_) {
    buffer_.push_back(std::move(exp));
  } else {
    buffer_[head_] = std::move(exp);
    head_ = (head_ + 1) % capacity_;
  }
}

std::vector<const Experience*> ReplayMemory::sample(std::size_t batch_size, Rng& rng) const {
  const std::size_t n = buffer_.size();
  if (batch_size > n) {
    throw SequenceError("replay sample: batch size exceeds stored experiences");
  }
  // Floyd's algorithm: batch_size distinct indices in [0, n).
  std::vector<std::size_t> picked;
  picked.reserve(batch_size);
  for (std::size_t j = n - batch_size; j < n; ++j) {
    const std::size_t t = static_cast<std::size_t>(rng.uniform_int(j + 1));
    if (std::find(picked.begin(), picked.end(), t) != picked.end()) {
      picked.push_back(j);
    } else {
      picked.push_back(t);
    }
  }
  std::vector<const Experience*> out;
  out.reserve(batch_size);
  for (std::size_t idx : picked) out.push_back(&at(idx));
  return out;
}

double epsilon_at(std::uint64_t step, const AgentConfig& config) {
  return std::max(config.epsilon_min,
                  config.epsilon_start - config.epsilon_decay * static_cast<double>(step));
}

std::string train_log_to_csv(const TrainLog& log) {
  std::ostringstream out;
  out << "episode,reward_sum,mean_loss,dr,fr,epsilon\n";
  for (const TrainEpisodeRow& r : log.rows) {
    out << r.episode << ',' << format_double(r.reward_sum) << ','
        << format_double(r.mean_loss) << ',' << format_double(r.dr) << ','
        << format_double(r.fr) << ',' << format_double(r.epsilon) << '\n';
  }
  return out.str();
}

namespace {

std::vector<int> full_layer_sizes(int state_size, const AgentConfig& cfg) {
  if (state_size < 1) throw ConfigError("agent: state size must be >= 1");
  std::vector<int> sizes;
  sizes.push_back(state_size);
  for (int h : cfg.hidden_sizes) sizes.push_back(h);
  sizes.push_back(2);  // approve / decline
  return sizes;
}

}  // namespace

DqnAgent::DqnAgent(int state_size, const AgentConfig& config, std::uint64_t seed)
    : config_(config),
      online_(mlp_init(full_layer_sizes(state_size, config), seed)),
      target_(online_),
      adam_(adam_init(online_)),
      memory_(config.replay_capacity),
      rng_(seed ^ 0x9e3779b97f4a7c15ull) {
  if (config.batch_size == 0) throw ConfigError("agent: batch size must be >= 1");
  if (config.gamma < 0.0 || config.gamma > 1.0) {
    throw ConfigError("agent: gamma must be in [0, 1]");
  }
  if (config.epsilon_min <= 0.0 || config.epsilon_min > config.epsilon_start ||
      config.epsilon_start > 1.0) {
    throw ConfigError("agent: need 0 < epsilon_min <= epsilon_start <= 1");
  }
}

double DqnAgent::current_epsilon() const {
  return epsilon_at(action_steps_, config_);
}

int DqnAgent::greedy_action(const EnvState& state) const {
  Matrix row(1, state.vec.size());
  row.row(0) = state.vec.transpose();
  const Matrix q = forward(online_, row);
  return q(0, 0) >= q(0, 1) ? 0 : 1;  // ties approve
}

int DqnAgent::select_action(const EnvState& state) {
  const double eps = current_epsilon();
  ++action_steps_;
  if (rng_.uniform() < eps) {
    return static_cast<int>(rng_.uniform_int(2));
  }
  return greedy_action(state);
}

void DqnAgent::remember(Experience exp) { memory_.push(std::move(exp)); }

void DqnAgent::sync_target() { target_ = online_; }

void DqnAgent::set_online_net(const Mlp& net) {
  if (net.layer_sizes != online_.layer_sizes) {
    throw ShapeError("agent: checkpoint layer sizes do not match configuration");
  }
  online_ = net;
  target_ = net;
}

std::optional<double> DqnAgent::replay_update() {
  if (memory_.size() < config_.batch_size) return std::nullopt;

  const auto batch = memory_.sample(config_.batch_size, rng_);
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index dim = online_.input_size();

  Matrix states(b, dim);
  Matrix next_states = Matrix::Zero(b, dim);
  for (Eigen::Index i = 0; i < b; ++i) {
    states.row(i) = batch[i]->state.transpose();
    if (!batch[i]->terminal) next_states.row(i) = batch[i]->next_state.transpose();
  }

  const Matrix next_q = forward(target_, next_states);
  Vector targets(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    double y = batch[i]->reward;
    if (!batch[i]->terminal) {
      y += config_.gamma * next_q.row(i).maxCoeff();
    }
    targets[i] = y;
  }

  ForwardCache cache;
  const Matrix q = forward(online_, states, &cache);
  Vector picked(b);
  for (Eigen::Index i = 0; i < b; ++i) picked[i] = q(i, batch[i]->action);

  const auto [loss, grad] = huber_loss(picked, targets, config_.huber_delta);
  Matrix output_grad = Matrix::Zero(b, 2);
  for (Eigen::Index i = 0; i < b; ++i) output_grad(i, batch[i]->action) = grad[i];

  const Gradients grads = backward(online_, cache, output_grad);
  adam_step(online_, grads, adam_, config_.learning_rate);
  return loss;
}

TrainLog DqnAgent::train(StreamEnv& env, const RewardConfig& reward_cfg,
                         const std::function<void(const TrainEpisodeRow&)>& on_episode) {
  TrainLog log;
  EnvState state = env.reset();
  bool stream_done = false;
  while (!stream_done) {
    const std::int64_t episode = env.episode_index();
    double reward_sum = 0.0;
    double loss_sum = 0.0;
    std::int64_t loss_count = 0;
    double end_dr = 0.0;
    double end_fr = 0.0;
    bool episode_done = false;
    while (!episode_done) {
      const int action = select_action(state);
      const StepResult res = env.step(action);
      const double r =
          reward_value(action, res.label, res.amount, res.dr, res.fr, reward_cfg);
      reward_sum += r;
      ++log.total_steps;

      Experience exp;
      exp.state = state.vec;
      exp.action = action;
      exp.reward = r;
      exp.terminal = res.stream_done;
      EnvState next;
      if (res.stream_done) {
        // next_state stays empty; the update target is the reward alone
      } else if (res.episode_done) {
        next = env.next_episode().value();
        exp.next_state = next.vec;
      } else {
        next = res.next_state;
        exp.next_state = next.vec;
      }
      remember(std::move(exp));

      if (const auto loss = replay_update()) {
        loss_sum += *loss;
        ++loss_count;
        ++log.total_updates;
      }

      episode_done = res.episode_done;
      stream_done = res.stream_done;
      end_dr = res.dr;
      end_fr = res.fr;
      if (!stream_done) state = std::move(next);
    }

    TrainEpisodeRow row;
    row.episode = episode;
    row.reward_sum = reward_sum;
    row.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
    row.dr = end_dr;
    row.fr = end_fr;
    row.epsilon = current_epsilon();
    log.rows.push_back(row);
    if (on_episode) on_episode(row);

    const std::int64_t completed = episode + 1;
    if (completed % config_.target_sync_episodes == 0) {
      sync_target();
      ++log.target_syncs;
    }
    if (config_.max_episodes > 0 && completed >= config_.max_episodes) break;
  }
  return log;
}

EvalResult evaluate_greedy(const Mlp& net, StreamEnv& env, const RewardConfig& reward_cfg) {
  EvalResult out;
  EnvState state = env.reset();
  bool stream_done = false;
  Matrix row(1, net.input_size());
  while (!stream_done) {
    const std::int64_t episode = env.episode_index();
    std::int64_t fraud_count = 0;
    double end_dr = 0.0;
    double end_fr = 0.0;
    bool episode_done = false;
    while (!episode_done) {
      row.row(0) = state.vec.transpose();
      const Matrix q = forward(net, row);
      const int action = q(0, 0) >= q(0, 1) ? 0 : 1;
      const StepResult res = env.step(action);
      out.reward_sum +=
          reward_value(action, res.label, res.amount, res.dr, res.fr, reward_cfg);
      out.actions.push_back(action);
      out.labels.push_back(res.label);
      out.amounts.push_back(res.amount);
      fraud_count += res.label;
      episode_done = res.episode_done;
      stream_done = res.stream_done;
      end_dr = res.dr;
      end_fr = res.fr;
      if (!stream_done) {
        state = res.episode_done ? env.next_episode().value() : res.next_state;
      }
    }
    out.trace.push_back({episode, end_dr, end_fr, fraud_count});
  }
  return out;
}

}  // namespace fraudrl
