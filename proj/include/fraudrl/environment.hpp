#pragma once

#include "fraudrl/types.hpp"

#include <cstdint>
#include <deque>
#include <optional>

namespace fraudrl {

// Tracks decline-rate (declined genuines / genuines seen) and fraud-rate
// (approved frauds / frauds seen) over a sliding window of recent decisions.
class RateTracker {
 public:
  explicit RateTracker(std::int64_t window);  // window >= 1

  void record(int action, int label);
  void reset();

  double decline_rate() const;  // 0 when no genuine rows in window
  double fraud_rate() const;    // 0 when no fraud rows in window
  std::int64_t size() const { return static_cast<std::int64_t>(entries_.size()); }

 private:
  struct Entry {
    int action;
    int label;
  };
  std::int64_t window_;
  std::deque<Entry> entries_;
  std::int64_t genuine_ = 0;
  std::int64_t declined_genuine_ = 0;
  std::int64_t fraud_ = 0;
  std::int64_t approved_fraud_ = 0;
};

// Free-function spellings of the two window rates.
double compute_dr(const RateTracker& tracker);
double compute_fr(const RateTracker& tracker);

enum class WindowMode {
  Rolling,          // window persists across episode boundaries
  PerEpisodeReset,  // rates reset to zero at each episode start
};

WindowMode window_mode_from_string(const std::string& name);
std::string to_string(WindowMode mode);

struct EnvConfig {
  std::int64_t episode_length = 500;
  std::int64_t rate_window = 4000;
  WindowMode window_mode = WindowMode::Rolling;
};

// State observed by the agent: transaction features plus the two rates.
struct EnvState {
  Vector vec;  // [features..., dr, fr]

  double dr() const { return vec[vec.size() - 2]; }
  double fr() const { return vec[vec.size() - 1]; }
};

struct StepResult {
  int label = 0;           // ground truth of the transaction just acted on
  double amount = 0.0;     // raw amount of that transaction
  double dr = 0.0;         // decline rate after the action was recorded
  double fr = 0.0;         // fraud rate after the action was recorded
  EnvState next_state;     // empty vec when stream_done
  bool episode_done = false;
  bool stream_done = false;
};

// Deterministic episodic environment over a fixed, ordered transaction stream.
// Episodes are consecutive slices of episode_length transactions; a shorter
// trailing slice still forms a (partial) final episode.
class StreamEnv {
 public:
  StreamEnv(const TransactionList& stream, const EnvConfig& config);

  // Rewinds to the start of the stream and returns the first state.
  EnvState reset();

  // Begins the next episode; call after episode_done. Returns nullopt at
  // stream end.
  std::optional<EnvState> next_episode();

  // Applies action (0 approve, 1 decline) to the current transaction.
  StepResult step(int action);

  std::int64_t episode_index() const { return episode_index_; }
  std::int64_t position() const { return position_; }
  std::int64_t stream_size() const { return static_cast<std::int64_t>(stream_->size()); }
  std::int64_t episode_count() const;
  // True when the current (or just-finished) episode is a short trailing one.
  bool in_partial_episode() const;
  const EnvConfig& config() const { return config_; }

 private:
  EnvState make_state(std::int64_t index) const;

  const TransactionList* stream_;
  EnvConfig config_;
  RateTracker tracker_;
  std::int64_t position_ = 0;       // index of the transaction awaiting an action
  std::int64_t episode_index_ = 0;  // 0-based episode counter
  bool awaiting_reset_ = true;
};

}  // namespace fraudrl
