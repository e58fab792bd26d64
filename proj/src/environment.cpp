#include "fraudrl/environment.hpp"

#include "fraudrl/errors.hpp"

namespace fraudrl {

RateTracker::RateTracker(std::int64_t window) : window_(window) {
  if (window < 1) throw ConfigError("rate window must be >= 1");
}

void RateTracker::record(int action, int label) {
  if (action != 0 && action != 1) throw InputError("rate tracker: action must be 0 or 1");
  if (label != 0 && label != 1) throw InputError("rate tracker: label must be 0 or 1");
  entries_.push_back({action, label});
  if (label == 0) {
    ++genuine_;
    if (action == 1) ++declined_genuine_;
  } else {
    ++fraud_;
    if (action == 0) ++approved_fraud_;
  }
  if (static_cast<std::int64_t>(entries_.size()) > window_) {
    const Entry old = entries_.front();
    entries_.pop_front();
    if (old.label == 0) {
      --genuine_;
      if (old.action == 1) --declined_genuine_;
    } else {
      --fraud_;
      if (old.action == 0) --approved_fraud_;
    }
  }
}

void RateTracker::reset() {
  entries_.clear();
  genuine_ = declined_genuine_ = fraud_ = approved_fraud_ = 0;
}

double RateTracker::decline_rate() const {
  if (genuine_ == 0) return 0.0;
  return static_cast<double>(declined_genuine_) / static_cast<double>(genuine_);
}

double RateTracker::fraud_rate() const {
  if (fraud_ == 0) return 0.0;
  return static_cast<double>(approved_fraud_) / static_cast<double>(fraud_);
}

double compute_dr(const RateTracker& tracker) { return tracker.decline_rate(); }
double compute_fr(const RateTracker& tracker) { return tracker.fraud_rate(); }

WindowMode window_mode_from_string(const std::string& name) {
  if (name == "rolling") return WindowMode::Rolling;
  if (name == "per_episode_reset") return WindowMode::PerEpisodeReset;
  throw ConfigError("unknown window mode '" + name + "'");
}

std::string to_string(WindowMode mode) {
  switch (mode) {
    case WindowMode::Rolling: return "rolling";
    case WindowMode::PerEpisodeReset: return "per_episode_reset";
  }
  throw ConfigError("invalid window mode value");
}

StreamEnv::StreamEnv(const TransactionList& stream, const EnvConfig& config)
    : stream_(&stream), config_(config), tracker_(config.rate_window) {
  if (stream.empty()) throw InputError("environment: transaction stream is empty");
  if (config.episode_length < 1) throw ConfigError("episode_length must be >= 1");
  const Eigen::Index dim = stream.front().features.size();
  for (const Transaction& t : stream) {
    if (t.features.size() != dim) {
      throw ShapeError("environment: transaction feature widths differ");
    }
  }
}

EnvState StreamEnv::make_state(std::int64_t index) const {
  const Transaction& t = (*stream_)[static_cast<std::size_t>(index)];
  EnvState s;
  s.vec.resize(t.features.size() + 2);
  s.vec.head(t.features.size()) = t.features;
  s.vec[t.features.size()] = tracker_.decline_rate();
  s.vec[t.features.size() + 1] = tracker_.fraud_rate();
  return s;
}

EnvState StreamEnv::reset() {
  position_ = 0;
  episode_index_ = 0;
  tracker_.reset();
  awaiting_reset_ = false;
  return make_state(0);
}

std::optional<EnvState> StreamEnv::next_episode() {
  if (awaiting_reset_) throw SequenceError("environment: call reset() first");
  if (position_ >= stream_size()) return std::nullopt;
  if (position_ % config_.episode_length != 0) {
    throw SequenceError("environment: current episode is not finished");
  }
  ++episode_index_;
  if (config_.window_mode == WindowMode::PerEpisodeReset) tracker_.reset();
  return make_state(position_);
}

StepResult StreamEnv::step(int action) {
  if (awaiting_reset_) throw SequenceError("environment: call reset() first");
  if (position_ >= stream_size()) {
    throw SequenceError("environment: stream is exhausted");
  }
  if (action != 0 && action != 1) throw InputError("environment: action must be 0 or 1");

  const Transaction& t = (*stream_)[static_cast<std::size_t>(position_)];
  tracker_.record(action, t.label);

  StepResult r;
  r.label = t.label;
  r.amount = t.amount;
  r.dr = tracker_.decline_rate();
  r.fr = tracker_.fraud_rate();
  ++position_;
  r.stream_done = position_ >= stream_size();
  r.episode_done = r.stream_done || (position_ % config_.episode_length == 0);
  if (!r.stream_done && !r.episode_done) {
    r.next_state = make_state(position_);
  }
  return r;
}

std::int64_t StreamEnv::episode_count() const {
  return (stream_size() + config_.episode_length - 1) / config_.episode_length;
}

bool StreamEnv::in_partial_episode() const {
  const std::int64_t start = episode_index_ * config_.episode_length;
  return stream_size() - start < config_.episode_length;
}

}  // namespace fraudrl
