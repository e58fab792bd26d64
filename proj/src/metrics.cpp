#include "fraudrl/metrics.hpp"

#include "fraudrl/errors.hpp"

#include "json.hpp"

#include <charconv>
#include <sstream>

namespace fraudrl {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

ConfusionCounts count_confusion(const std::vector<int>& actions,
                                const std::vector<int>& labels) {
  if (actions.size() != labels.size()) {
    throw ShapeError("confusion counts: actions and labels lengths differ");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const int a = actions[i];
    const int l = labels[i];
    if ((a != 0 && a != 1) || (l != 0 && l != 1)) {
      throw InputError("confusion counts: actions and labels must be 0 or 1");
    }
    if (a == 1 && l == 1) ++c.tp;
    else if (a == 1 && l == 0) ++c.fp;
    else if (a == 0 && l == 0) ++c.tn;
    else ++c.fn;
  }
  return c;
}

double precision(const ConfusionCounts& c) {
  const std::int64_t den = c.tp + c.fp;
  return den == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(den);
}

double recall(const ConfusionCounts& c) {
  const std::int64_t den = c.tp + c.fn;
  return den == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(den);
}

double f1_score(const ConfusionCounts& c) {
  const double p = precision(c);
  const double r = recall(c);
  return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double approval_pct(const ConfusionCounts& c) {
  const std::int64_t total = c.total();
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(c.tn + c.fn) / static_cast<double>(total);
}

double approval_pct(const std::vector<int>& actions) {
  if (actions.empty()) return 0.0;
  std::int64_t approved = 0;
  for (int a : actions) {
    if (a != 0 && a != 1) throw InputError("approval_pct: actions must be 0 or 1");
    if (a == 0) ++approved;
  }
  return 100.0 * static_cast<double>(approved) / static_cast<double>(actions.size());
}

double fraud_bps(const ConfusionCounts& c) {
  const std::int64_t total = c.total();
  if (total == 0) return 0.0;
  return 1e4 * static_cast<double>(c.fn) / static_cast<double>(total);
}

double fraud_bps(const std::vector<int>& actions, const std::vector<int>& labels) {
  return fraud_bps(count_confusion(actions, labels));
}

MoneyBreakdown monetary_breakdown(const std::vector<int>& actions,
                                  const std::vector<int>& labels,
                                  const std::vector<double>& amounts) {
  if (actions.size() != labels.size() || actions.size() != amounts.size()) {
    throw ShapeError("monetary breakdown: input lengths differ");
  }
  MoneyBreakdown m;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const double amt = amounts[i];
    if (actions[i] == 0) {
      (labels[i] == 0 ? m.genuine_approved : m.fraud_approved) += amt;
    } else {
      (labels[i] == 0 ? m.genuine_declined : m.fraud_declined) += amt;
    }
  }
  return m;
}

MetricsReport make_report(const std::vector<int>& actions, const std::vector<int>& labels,
                          const std::vector<double>& amounts) {
  MetricsReport r;
  r.counts = count_confusion(actions, labels);
  r.precision = precision(r.counts);
  r.recall = recall(r.counts);
  r.f1 = f1_score(r.counts);
  r.approval_pct = approval_pct(r.counts);
  r.fraud_bps = fraud_bps(r.counts);
  r.money = monetary_breakdown(actions, labels, amounts);
  return r;
}

std::string metrics_to_json(const MetricsReport& r) {
  nlohmann::json doc;
  doc["counts"] = {{"tp", r.counts.tp},
                   {"fp", r.counts.fp},
                   {"tn", r.counts.tn},
                   {"fn", r.counts.fn},
                   {"total", r.counts.total()}};
  doc["precision"] = r.precision;
  doc["recall"] = r.recall;
  doc["f1"] = r.f1;
  doc["approval_pct"] = r.approval_pct;
  doc["fraud_bps"] = r.fraud_bps;
  doc["money"] = {{"genuine_approved", r.money.genuine_approved},
                  {"genuine_declined", r.money.genuine_declined},
                  {"fraud_approved", r.money.fraud_approved},
                  {"fraud_declined", r.money.fraud_declined},
                  {"total", r.money.total()}};
  return doc.dump(2) + "\n";
}

std::vector<EpisodeTraceRow> episode_trace(const std::vector<int>& actions,
                                           const std::vector<int>& labels,
                                           const EnvConfig& env_config) {
  if (actions.size() != labels.size()) {
    throw ShapeError("episode trace: actions and labels lengths differ");
  }
  std::vector<EpisodeTraceRow> rows;
  if (actions.empty()) return rows;
  RateTracker tracker(env_config.rate_window);
  const std::int64_t l = env_config.episode_length;
  std::int64_t episode = 0;
  std::int64_t fraud_count = 0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto pos = static_cast<std::int64_t>(i);
    if (pos > 0 && pos % l == 0) {
      ++episode;
      fraud_count = 0;
      if (env_config.window_mode == WindowMode::PerEpisodeReset) tracker.reset();
    }
    tracker.record(actions[i], labels[i]);
    fraud_count += labels[i];
    const bool last_of_episode =
        (pos + 1) % l == 0 || i + 1 == actions.size();
    if (last_of_episode) {
      rows.push_back({episode, tracker.decline_rate(), tracker.fraud_rate(), fraud_count});
    }
  }
  return rows;
}

std::string trace_to_csv(const std::vector<EpisodeTraceRow>& rows) {
  std::ostringstream out;
  out << "episode,dr,fr,fraud_count\n";
  for (const EpisodeTraceRow& row : rows) {
    out << row.episode << ',' << format_double(row.dr) << ',' << format_double(row.fr)
        << ',' << row.fraud_count << '\n';
  }
  return out.str();
}

}  // namespace fraudrl
