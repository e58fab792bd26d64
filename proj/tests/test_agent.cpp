#include "doctest.h"

#include "fraudrl/agent.hpp"
#include "fraudrl/errors.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

using namespace fraudrl;

namespace {

TransactionList make_stream(int n, int feature_dim = 3) {
  TransactionList out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Transaction t;
    t.index = i;
    t.features = Vector::Constant(feature_dim, 0.001 * i);
    t.amount = 5.0 + i % 13;
    t.label = i % 7 == 0 ? 1 : 0;
    out.push_back(std::move(t));
  }
  return out;
}

Mlp zeroed_like(const Mlp& src) {
  Mlp z = src;
  for (auto& w : z.weights) w.setZero();
  for (auto& b : z.biases) b.setZero();
  return z;
}

Experience make_exp(double s, int action, double reward, double next, bool terminal) {
  Experience e;
  e.state = Vector::Constant(1, s);
  e.action = action;
  e.reward = reward;
  if (!terminal) e.next_state = Vector::Constant(1, next);
  e.terminal = terminal;
  return e;
}

}  // namespace

TEST_CASE("replay memory keeps the newest experiences in fifo order") {
  ReplayMemory mem(3);
  CHECK(mem.capacity() == 3);
  for (int i = 1; i <= 5; ++i) {
    mem.push(make_exp(static_cast<double>(i), 0, 0.0, 0.0, false));
  }
  REQUIRE(mem.size() == 3);
  CHECK(mem.at(0).state[0] == 3.0);  // oldest survivor
  CHECK(mem.at(1).state[0] == 4.0);
  CHECK(mem.at(2).state[0] == 5.0);
}

TEST_CASE("replay sampling is without replacement") {
  ReplayMemory mem(8);
  for (int i = 0; i < 5; ++i) mem.push(make_exp(static_cast<double>(i), 0, 0, 0, false));
  Rng rng(3);

  // Full-buffer draw is a permutation.
  auto batch = mem.sample(5, rng);
  std::vector<double> seen;
  for (const Experience* e : batch) seen.push_back(e->state[0]);
  std::sort(seen.begin(), seen.end());
  CHECK(seen == std::vector<double>({0.0, 1.0, 2.0, 3.0, 4.0}));

  // Partial draws never repeat a pointer.
  for (int trial = 0; trial < 50; ++trial) {
    auto b = mem.sample(3, rng);
    CHECK(b[0] != b[1]);
    CHECK(b[0] != b[2]);
    CHECK(b[1] != b[2]);
  }

  CHECK_THROWS_AS(mem.sample(6, rng), SequenceError);
  CHECK_THROWS_AS(ReplayMemory(0), ConfigError);
}

TEST_CASE("exploration schedule anneals linearly to the floor") {
  AgentConfig cfg;  // 1.0 - 8e-6 * t, floor 0.01
  CHECK(epsilon_at(0, cfg) == 1.0);
  CHECK(epsilon_at(1000, cfg) == doctest::Approx(0.992).epsilon(1e-12));
  CHECK(epsilon_at(123750, cfg) == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(epsilon_at(123751, cfg) == 0.01);
  CHECK(epsilon_at(10'000'000, cfg) == 0.01);
}

TEST_CASE("agent configuration is validated") {
  const AgentConfig ok;
  CHECK_NOTHROW(DqnAgent(3, ok, 1));
  CHECK_THROWS_AS(DqnAgent(0, ok, 1), ConfigError);

  AgentConfig bad = ok;
  bad.batch_size = 0;
  CHECK_THROWS_AS(DqnAgent(3, bad, 1), ConfigError);
  bad = ok;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(DqnAgent(3, bad, 1), ConfigError);
  bad = ok;
  bad.epsilon_min = 0.0;
  CHECK_THROWS_AS(DqnAgent(3, bad, 1), ConfigError);
  bad = ok;
  bad.epsilon_start = 1.2;
  CHECK_THROWS_AS(DqnAgent(3, bad, 1), ConfigError);
  bad = ok;
  bad.replay_capacity = 0;
  CHECK_THROWS_AS(DqnAgent(3, bad, 1), ConfigError);
}

TEST_CASE("greedy action breaks ties toward approve") {
  AgentConfig cfg;
  cfg.hidden_sizes = {4};
  DqnAgent agent(2, cfg, 5);
  Mlp z = zeroed_like(agent.online_net());
  agent.set_online_net(z);
  EnvState st;
  st.vec = Vector::Constant(2, 0.7);
  CHECK(agent.greedy_action(st) == 0);  // q = (0, 0): tie

  z.biases.back()[1] = 1.0;  // decline strictly better
  agent.set_online_net(z);
  CHECK(agent.greedy_action(st) == 1);

  z.biases.back()[1] = -1.0;
  agent.set_online_net(z);
  CHECK(agent.greedy_action(st) == 0);

  CHECK_THROWS_AS(agent.set_online_net(mlp_init({2, 5, 2}, 1)), ShapeError);
}

TEST_CASE("action selection consumes randomness in a fixed pattern") {
  // Pinned exploration: one uniform draw, then one coin flip when exploring.
  AgentConfig cfg;
  cfg.hidden_sizes = {4};
  cfg.epsilon_start = 1.0;
  cfg.epsilon_min = 1.0;
  cfg.epsilon_decay = 0.0;
  DqnAgent agent(3, cfg, 123);
  Rng mirror(123ull ^ 0x9e3779b97f4a7c15ull);
  EnvState st;
  st.vec = Vector::Constant(3, 0.2);
  for (int i = 0; i < 200; ++i) {
    const double u = mirror.uniform();
    CHECK(u < 1.0);
    const int expected = static_cast<int>(mirror.uniform_int(2));
    CHECK(agent.select_action(st) == expected);
  }
  CHECK(agent.action_steps() == 200);
  CHECK(agent.current_epsilon() == 1.0);
}

TEST_CASE("epsilon-greedy mixes exploration and greedy picks predictably") {
  AgentConfig cfg;
  cfg.hidden_sizes = {4};
  cfg.epsilon_start = 0.5;
  cfg.epsilon_min = 0.1;
  cfg.epsilon_decay = 1e-3;
  DqnAgent agent(3, cfg, 9);
  Rng mirror(9ull ^ 0x9e3779b97f4a7c15ull);
  int explored = 0, exploited = 0;
  for (int i = 0; i < 500; ++i) {
    EnvState st;
    st.vec = Vector::Constant(3, 0.01 * (i % 11));
    const double eps = epsilon_at(static_cast<std::uint64_t>(i), cfg);
    const double u = mirror.uniform();
    int expected;
    if (u < eps) {
      expected = static_cast<int>(mirror.uniform_int(2));
      ++explored;
    } else {
      expected = agent.greedy_action(st);
      ++exploited;
    }
    CHECK(agent.select_action(st) == expected);
  }
  CHECK(explored > 50);   // schedule starts at 0.5
  CHECK(exploited > 50);  // and decays to 0.1
}

TEST_CASE("replay update below batch size is a no-op") {
  AgentConfig cfg;
  cfg.hidden_sizes = {4};
  cfg.batch_size = 4;
  DqnAgent agent(1, cfg, 2);
  for (int i = 0; i < 3; ++i) {
    agent.remember(make_exp(0.1 * i, 0, 0.0, 0.1, false));
    CHECK(!agent.replay_update().has_value());
  }
  agent.remember(make_exp(0.9, 1, 0.0, 0.1, false));
  CHECK(agent.replay_update().has_value());
}

TEST_CASE("one replay update from a zero network matches hand arithmetic") {
  AgentConfig cfg;
  cfg.hidden_sizes = {1};
  cfg.batch_size = 2;
  cfg.replay_capacity = 8;
  cfg.gamma = 0.5;
  cfg.learning_rate = 0.25;
  cfg.huber_delta = 1.0;
  DqnAgent agent(1, cfg, 17);
  agent.set_online_net(zeroed_like(agent.online_net()));

  agent.remember(make_exp(0.5, 0, 0.4, 0.2, false));
  agent.remember(make_exp(-0.3, 1, -0.6, 0.0, true));

  // Zero nets: q == 0 everywhere, so y1 = 0.4 + 0.5*0 = 0.4, y2 = -0.6
  // (terminal), residuals (-0.4, 0.6), mean huber = (0.08 + 0.18)/2.
  const auto loss = agent.replay_update();
  REQUIRE(loss.has_value());
  CHECK(*loss == doctest::Approx(0.13).epsilon(1e-12));

  // Only the output biases carry gradient (0 activations kill the weights);
  // a first adam step moves them by ~lr * sign(grad).
  const Mlp& net = agent.online_net();
  CHECK(net.biases.back()[0] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(net.biases.back()[1] == doctest::Approx(-0.25).epsilon(1e-6));
  for (const auto& w : net.weights) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(net.biases.front().cwiseAbs().maxCoeff() == 0.0);

  // The target network must not move until an explicit sync.
  CHECK(agent.target_net().biases.back().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bootstrap targets read the synced target network, masked at terminals") {
  AgentConfig cfg;
  cfg.hidden_sizes = {1};
  cfg.batch_size = 2;
  cfg.replay_capacity = 8;
  cfg.gamma = 0.5;
  cfg.learning_rate = 0.25;
  DqnAgent agent(1, cfg, 17);
  agent.set_online_net(zeroed_like(agent.online_net()));
  agent.remember(make_exp(0.5, 0, 0.4, 0.2, false));
  agent.remember(make_exp(-0.3, 1, -0.6, 0.0, true));
  REQUIRE(agent.replay_update().has_value());
  agent.sync_target();

  // Recompute the expected loss from the measured networks.
  const auto q_of = [](const Mlp& net, double s) {
    Matrix row(1, 1);
    row(0, 0) = s;
    return forward(net, row);
  };
  const Matrix q1 = q_of(agent.online_net(), 0.5);
  const Matrix q2 = q_of(agent.online_net(), -0.3);
  const Matrix tq = q_of(agent.target_net(), 0.2);
  const double y1 = 0.4 + 0.5 * std::max(tq(0, 0), tq(0, 1));
  const double y2 = -0.6;  // terminal: no bootstrap term
  const double e1 = q1(0, 0) - y1;
  const double e2 = q2(0, 1) - y2;
  const double expected = (0.5 * e1 * e1 + 0.5 * e2 * e2) / 2.0;

  const auto loss = agent.replay_update();
  REQUIRE(loss.has_value());
  CHECK(*loss == doctest::Approx(expected).epsilon(1e-12));
  // If the terminal flag were ignored, y2 would gain a bootstrap term and
  // the residual would drop by gamma * max target-q: a visibly different loss.
  const double e2_unmasked = e2 - 0.5 * std::max(tq(0, 0), tq(0, 1));
  const double unmasked = (0.5 * e1 * e1 + 0.5 * e2_unmasked * e2_unmasked) / 2.0;
  CHECK(*loss != doctest::Approx(unmasked).epsilon(1e-6));
}

TEST_CASE("gamma zero reduces the target to the immediate reward") {
  AgentConfig cfg;
  cfg.hidden_sizes = {1};
  cfg.batch_size = 2;
  cfg.gamma = 0.0;
  DqnAgent agent(1, cfg, 4);
  agent.set_online_net(zeroed_like(agent.online_net()));
  agent.remember(make_exp(0.5, 0, 0.4, 0.2, false));
  agent.remember(make_exp(-0.3, 1, -0.6, 0.7, false));
  const auto loss = agent.replay_update();
  REQUIRE(loss.has_value());
  CHECK(*loss == doctest::Approx(0.13).epsilon(1e-12));
}

TEST_CASE("training walks the stream episode by episode") {
  const TransactionList stream = make_stream(1000);
  EnvConfig env_cfg;
  env_cfg.episode_length = 100;
  env_cfg.rate_window = 50;
  StreamEnv env(stream, env_cfg);

  AgentConfig cfg;
  cfg.hidden_sizes = {4};
  cfg.batch_size = 16;
  cfg.replay_capacity = 2000;
  cfg.learning_rate = 0.01;
  cfg.gamma = 0.9;
  cfg.target_sync_episodes = 3;
  cfg.epsilon_decay = 1e-4;
  DqnAgent agent(5, cfg, 31);

  std::vector<std::int64_t> seen_episodes;
  const RewardConfig reward;
  const TrainLog log = agent.train(
      env, reward, [&](const TrainEpisodeRow& row) { seen_episodes.push_back(row.episode); });

  REQUIRE(log.rows.size() == 10);
  CHECK(log.total_steps == 1000);
  // Updates start once the buffer reaches one batch (after 16 pushes).
  CHECK(log.total_updates == 1000 - 15);
  CHECK(log.target_syncs == 3);  // after episodes 3, 6, 9
  CHECK(seen_episodes.size() == 10);
  for (std::size_t e = 0; e < 10; ++e) {
    CHECK(log.rows[e].episode == static_cast<std::int64_t>(e));
    CHECK(log.rows[e].epsilon ==
          epsilon_at(100 * (static_cast<std::uint64_t>(e) + 1), cfg));
  }
  CHECK(agent.action_steps() == 1000);

  // Replay holds the full run: consecutive experiences stitch together,
  // including across episode boundaries; only the last one is terminal.
  const ReplayMemory& mem = agent.memory();
  REQUIRE(mem.size() == 1000);
  for (std::size_t i = 0; i + 1 < 1000; ++i) {
    const Experience& cur = mem.at(i);
    const Experience& nxt = mem.at(i + 1);
    CHECK(!cur.terminal);
    REQUIRE(cur.next_state.size() == nxt.state.size());
    CHECK((cur.next_state - nxt.state).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(mem.at(999).terminal);
  CHECK(mem.at(999).next_state.size() == 0);

  // Episode reward sums and end-of-episode rates agree with a recount.
  std::vector<int> actions;
  std::vector<int> labels;
  for (std::size_t i = 0; i < 1000; ++i) {
    actions.push_back(mem.at(i).action);
    labels.push_back(stream[i].label);
  }
  const auto trace = episode_trace(actions, labels, env_cfg);
  REQUIRE(trace.size() == 10);
  for (std::size_t e = 0; e < 10; ++e) {
    double sum = 0.0;
    for (std::size_t i = 100 * e; i < 100 * (e + 1); ++i) sum += mem.at(i).reward;
    CHECK(log.rows[e].reward_sum == sum);
    CHECK(log.rows[e].dr == trace[e].dr);
    CHECK(log.rows[e].fr == trace[e].fr);
  }
}

TEST_CASE("target syncs fire every twenty-five completed episodes by default") {
  const TransactionList stream = make_stream(1000);
  EnvConfig env_cfg;
  env_cfg.episode_length = 10;
  StreamEnv env(stream, env_cfg);
  AgentConfig cfg;
  cfg.hidden_sizes = {4};
  cfg.batch_size = 16;
  cfg.replay_capacity = 2000;
  DqnAgent agent(5, cfg, 8);
  const TrainLog log = agent.train(env, RewardConfig{});
  CHECK(log.rows.size() == 100);
  CHECK(log.target_syncs == 4);  // episodes 25, 50, 75, 100
}

TEST_CASE("max episodes caps a training run") {
  const TransactionList stream = make_stream(1000);
  EnvConfig env_cfg;
  env_cfg.episode_length = 10;
  StreamEnv env(stream, env_cfg);
  AgentConfig cfg;
  cfg.hidden_sizes = {4};
  cfg.batch_size = 16;
  cfg.max_episodes = 7;
  DqnAgent agent(5, cfg, 8);
  const TrainLog log = agent.train(env, RewardConfig{});
  CHECK(log.rows.size() == 7);
  CHECK(log.total_steps == 70);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  const TransactionList stream = make_stream(600);
  EnvConfig env_cfg;
  env_cfg.episode_length = 50;
  AgentConfig cfg;
  cfg.hidden_sizes = {6};
  cfg.batch_size = 16;
  cfg.replay_capacity = 1000;

  const auto run = [&](std::uint64_t seed) {
    StreamEnv env(stream, env_cfg);
    DqnAgent agent(5, cfg, seed);
    return train_log_to_csv(agent.train(env, RewardConfig{}));
  };
  const std::string a = run(77);
  CHECK(a == run(77));
  CHECK(a != run(78));
  CHECK(a.rfind("episode,reward_sum,mean_loss,dr,fr,epsilon\n", 0) == 0);
}

TEST_CASE("greedy evaluation of a zero network approves everything") {
  const TransactionList stream = make_stream(230);
  EnvConfig env_cfg;
  env_cfg.episode_length = 50;
  env_cfg.rate_window = 40;
  StreamEnv env(stream, env_cfg);
  const Mlp net = zeroed_like(mlp_init({5, 4, 2}, 1));
  const RewardConfig reward;

  const EvalResult res = evaluate_greedy(net, env, reward);
  REQUIRE(res.actions.size() == 230);
  for (std::size_t i = 0; i < 230; ++i) {
    CHECK(res.actions[i] == 0);
    CHECK(res.labels[i] == stream[i].label);
    CHECK(res.amounts[i] == stream[i].amount);
  }
  CHECK(approval_pct(res.actions) == 100.0);
  CHECK(recall(count_confusion(res.actions, res.labels)) == 0.0);

  // trace matches the trace helper, reward_sum matches a tracker mirror.
  const auto trace = episode_trace(res.actions, res.labels, env_cfg);
  REQUIRE(res.trace.size() == trace.size());
  for (std::size_t e = 0; e < trace.size(); ++e) {
    CHECK(res.trace[e].episode == trace[e].episode);
    CHECK(res.trace[e].dr == trace[e].dr);
    CHECK(res.trace[e].fr == trace[e].fr);
    CHECK(res.trace[e].fraud_count == trace[e].fraud_count);
  }
  RateTracker mirror(env_cfg.rate_window);
  double expect_sum = 0.0;
  for (const Transaction& t : stream) {
    mirror.record(0, t.label);
    expect_sum += reward_value(0, t.label, t.amount, mirror.decline_rate(),
                               mirror.fraud_rate(), reward);
  }
  CHECK(res.reward_sum == expect_sum);
}

TEST_CASE("greedy evaluation plays argmax of the policy network") {
  const TransactionList stream = make_stream(37);
  EnvConfig env_cfg;
  env_cfg.episode_length = 10;  // trailing partial episode included
  env_cfg.rate_window = 8;
  StreamEnv env(stream, env_cfg);
  const Mlp net = mlp_init({5, 6, 2}, 44);

  const EvalResult res = evaluate_greedy(net, env, RewardConfig{});
  REQUIRE(res.actions.size() == 37);
  RateTracker mirror(env_cfg.rate_window);
  Matrix row(1, 5);
  for (std::size_t i = 0; i < 37; ++i) {
    Vector sv(5);
    sv << stream[i].features, mirror.decline_rate(), mirror.fraud_rate();
    row.row(0) = sv.transpose();
    const Matrix q = forward(net, row);
    const int expected = q(0, 0) >= q(0, 1) ? 0 : 1;
    CHECK(res.actions[i] == expected);
    mirror.record(expected, stream[i].label);
  }
  CHECK(res.trace.size() == 4);

  // A second pass reproduces the first exactly.
  StreamEnv env2(stream, env_cfg);
  const EvalResult again = evaluate_greedy(net, env2, RewardConfig{});
  CHECK(again.actions == res.actions);
  CHECK(again.reward_sum == res.reward_sum);
}
