#include "fraudrl/rewards.hpp"

#include "fraudrl/errors.hpp"

#include <cmath>

namespace fraudrl {

RewardKind reward_kind_from_string(const std::string& name) {
  if (name == "combined") return RewardKind::Combined;
  if (name == "rprime") return RewardKind::RPrime;
  if (name == "rdouble") return RewardKind::RDouble;
  throw ConfigError("unknown reward kind '" + name + "'");
}

std::string to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::Combined: return "combined";
    case RewardKind::RPrime: return "rprime";
    case RewardKind::RDouble: return "rdouble";
  }
  throw ConfigError("invalid reward kind value");
}

ImbalanceStats imbalance_ratio(const TransactionList& dataset) {
  ImbalanceStats stats;
  for (const Transaction& t : dataset) {
    (t.label == 1 ? stats.fraud_count : stats.genuine_count) += 1;
  }
  if (stats.genuine_count == 0) {
    throw InputError("imbalance ratio undefined: no genuine rows");
  }
  stats.ratio =
      static_cast<double>(stats.fraud_count) / static_cast<double>(stats.genuine_count);
  return stats;
}

double reward_monetary(int action, int label, double amount, double alpha) {
  if (amount < 0.0) throw InputError("reward: amount must be >= 0");
  const double term = std::log(std::max(amount, 1.0));
  if (label == 1) {
    return action == 1 ? term : -term;
  }
  return action == 0 ? alpha * term : -alpha * term;
}

double reward_balance(double dr, double fr, double beta, double scale) {
  if (dr < 0.0 || dr > 1.0 || fr < 0.0 || fr > 1.0) {
    throw InputError("reward: dr and fr must be in [0, 1]");
  }
  if (beta <= 0.0) throw InputError("reward: beta must be > 0");
  const double b2 = beta * beta;
  const double den = b2 * (1.0 - dr) + (1.0 - fr);
  if (den == 0.0) return 0.0;
  return scale * (1.0 + b2) * (1.0 - dr) * (1.0 - fr) / den;
}

double reward_combined(int action, int label, double amount, double dr, double fr,
                       const RewardConfig& cfg) {
  return reward_monetary(action, label, amount, cfg.alpha) +
         reward_balance(dr, fr, cfg.beta, cfg.balance_scale);
}

double reward_prime(int action, int label, double lambda) {
  if (lambda <= 0.0) throw InputError("reward: lambda must be > 0");
  if (label == 1) {
    return action == 1 ? 1.0 : -1.0;
  }
  return action == 0 ? lambda : -lambda;
}

double reward_value(int action, int label, double amount, double dr, double fr,
                    const RewardConfig& cfg) {
  if (action != 0 && action != 1) throw InputError("reward: action must be 0 or 1");
  if (label != 0 && label != 1) throw InputError("reward: label must be 0 or 1");
  switch (cfg.kind) {
    case RewardKind::Combined:
      return reward_combined(action, label, amount, dr, fr, cfg);
    case RewardKind::RPrime:
      if (!cfg.lambda_prime) {
        throw ConfigError("reward: lambda_prime is unresolved (derive it from the "
                          "training split first)");
      }
      return reward_prime(action, label, *cfg.lambda_prime);
    case RewardKind::RDouble:
      return reward_prime(action, label, cfg.lambda_double);
  }
  throw ConfigError("invalid reward kind value");
}

}  // namespace fraudrl
