#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace fraudrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One time-ordered payment record. `features` is the attribute vector fed to
// the models (scaled after preprocessing); `amount` stays in raw currency
// units because the monetary reward is computed on unscaled amounts.
struct Transaction {
  std::int64_t index = 0;
  Vector features;
  double amount = 0.0;
  int label = 0;  // 0 genuine, 1 fraud
};

using TransactionList = std::vector<Transaction>;

}  // namespace fraudrl
