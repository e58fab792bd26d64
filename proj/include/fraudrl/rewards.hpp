#pragma once

#include "fraudrl/types.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace fraudrl {

// Which reward signal drives training / evaluation.
enum class RewardKind {
  Combined,  // monetary term + rate-balance term
  RPrime,    // +-1 on fraud, +-lambda on genuine, lambda = class imbalance ratio
  RDouble,   // same shape with lambda fixed (default 0.1)
};

RewardKind reward_kind_from_string(const std::string& name);
std::string to_string(RewardKind kind);

struct RewardConfig {
  RewardKind kind = RewardKind::Combined;
  double alpha = 0.02;          // scales the genuine-transaction monetary term
  double beta = 0.5;            // weighting between decline rate and fraud rate
  double balance_scale = 0.125;
  // Genuine-class weight for RPrime; unset means "derive from the training
  // split's class imbalance ratio".
  std::optional<double> lambda_prime;
  double lambda_double = 0.1;
};

struct ImbalanceStats {
  std::int64_t fraud_count = 0;
  std::int64_t genuine_count = 0;
  double ratio = 0.0;  // fraud_count / genuine_count
};

// Exact class counts and their ratio; throws if there are no genuine rows.
ImbalanceStats imbalance_ratio(const TransactionList& dataset);

// action: 0 approve, 1 decline. label: 0 genuine, 1 fraud.
// +-alpha*ln(max(amount,1)) for genuine outcomes, +-ln(max(amount,1)) for fraud.
double reward_monetary(int action, int label, double amount, double alpha);

// scale * (1+b^2)(1-dr)(1-fr) / (b^2(1-dr) + (1-fr)); 0 when the denominator
// vanishes (dr = fr = 1).
double reward_balance(double dr, double fr, double beta, double scale);

// Monetary + balance, with dr/fr taken AFTER the current action is recorded.
double reward_combined(int action, int label, double amount, double dr, double fr,
                       const RewardConfig& cfg);

// Fraud rows: +1 if action matches the label, else -1; genuine rows the same
// with +-lambda.
double reward_prime(int action, int label, double lambda);

// Dispatch on cfg.kind.
double reward_value(int action, int label, double amount, double dr, double fr,
                    const RewardConfig& cfg);

}  // namespace fraudrl
