#pragma once

#include "fraudrl/environment.hpp"
#include "fraudrl/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fraudrl {

// Decline is the positive prediction: a true positive is a declined fraud.
struct ConfusionCounts {
  std::int64_t tp = 0;  // declined fraud
  std::int64_t fp = 0;  // declined genuine
  std::int64_t tn = 0;  // approved genuine
  std::int64_t fn = 0;  // approved fraud
  std::int64_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts count_confusion(const std::vector<int>& actions,
                                const std::vector<int>& labels);

// All three are 0 when their denominator is 0.
double precision(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
double f1_score(const ConfusionCounts& c);

// Percentage of all decisions that were approvals.
double approval_pct(const ConfusionCounts& c);
double approval_pct(const std::vector<int>& actions);
// Approved frauds per ten thousand decisions.
double fraud_bps(const ConfusionCounts& c);
double fraud_bps(const std::vector<int>& actions, const std::vector<int>& labels);

// Raw-amount sums partitioned by (label, action).
struct MoneyBreakdown {
  double genuine_approved = 0.0;  // revenue kept
  double genuine_declined = 0.0;  // revenue lost to false declines
  double fraud_approved = 0.0;    // fraud loss
  double fraud_declined = 0.0;    // fraud prevented
  double total() const {
    return genuine_approved + genuine_declined + fraud_approved + fraud_declined;
  }
};

MoneyBreakdown monetary_breakdown(const std::vector<int>& actions,
                                  const std::vector<int>& labels,
                                  const std::vector<double>& amounts);

struct MetricsReport {
  ConfusionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double approval_pct = 0.0;
  double fraud_bps = 0.0;
  MoneyBreakdown money;
};

MetricsReport make_report(const std::vector<int>& actions, const std::vector<int>& labels,
                          const std::vector<double>& amounts);

std::string metrics_to_json(const MetricsReport& report);

// Per-episode evolution of the two rates over a decision stream.
struct EpisodeTraceRow {
  std::int64_t episode = 0;
  double dr = 0.0;  // rates at the end of the episode
  double fr = 0.0;
  std::int64_t fraud_count = 0;  // fraud rows inside the episode
};

// Recomputes dr/fr under the environment's window rules and chunks the
// stream into episodes of env_config.episode_length (final partial included).
std::vector<EpisodeTraceRow> episode_trace(const std::vector<int>& actions,
                                           const std::vector<int>& labels,
                                           const EnvConfig& env_config);

std::string trace_to_csv(const std::vector<EpisodeTraceRow>& rows);

// Round-trip-exact decimal formatting (shortest form that parses back equal).
std::string format_double(double value);

}  // namespace fraudrl
