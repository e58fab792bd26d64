#include "fraudrl/baseline.hpp"

#include "fraudrl/errors.hpp"
#include "fraudrl/metrics.hpp"
#include "fraudrl/rng.hpp"

#include <algorithm>
#include <cmath>

namespace fraudrl {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<int> full_layer_sizes(Eigen::Index input, const BaselineConfig& cfg) {
  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(input));
  for (int h : cfg.hidden_sizes) sizes.push_back(h);
  sizes.push_back(1);
  return sizes;
}

}  // namespace

Vector baseline_scores(const Mlp& net, const Matrix& features) {
  if (net.output_size() != 1) {
    throw ShapeError("baseline: network must have a single output");
  }
  const Matrix logits = forward(net, features);
  Vector scores(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) scores[i] = sigmoid(logits(i, 0));
  return scores;
}

std::pair<double, Vector> bce_with_logits(const Vector& logits, const Vector& targets) {
  if (logits.size() != targets.size()) {
    throw ShapeError("bce: logits and targets lengths differ");
  }
  const auto n = logits.size();
  if (n == 0) throw InputError("bce: empty batch");
  double loss = 0.0;
  Vector grad(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = logits[i];
    const double y = targets[i];
    // max(z,0) - z*y + log1p(exp(-|z|)) avoids overflow for large |z|
    loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    grad[i] = sigmoid(z) - y;
  }
  loss /= static_cast<double>(n);
  grad /= static_cast<double>(n);
  return {loss, grad};
}

BaselineModel train_baseline(const Matrix& train_x, const Vector& train_y,
                             const Matrix& val_x, const Vector& val_y,
                             const BaselineConfig& config, std::uint64_t seed,
                             BaselineTrainLog* log) {
  if (train_x.rows() != train_y.size() || val_x.rows() != val_y.size()) {
    throw ShapeError("baseline: feature/label row counts differ");
  }
  if (train_x.rows() == 0 || val_x.rows() == 0) {
    throw InputError("baseline: train and validation splits must be non-empty");
  }
  if (config.batch_size == 0) throw ConfigError("baseline: batch size must be >= 1");
  if (config.max_epochs < 1) throw ConfigError("baseline: max_epochs must be >= 1");
  if (config.patience < 1) throw ConfigError("baseline: patience must be >= 1");
  if (config.threshold_grid < 1) {
    throw ConfigError("baseline: threshold_grid must be >= 1");
  }

  Mlp net = mlp_init(full_layer_sizes(train_x.cols(), config), seed);
  AdamState adam = adam_init(net);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);

  const Eigen::Index n = train_x.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  const auto eval_loss = [&](const Matrix& x, const Vector& y) {
    const Matrix logits = forward(net, x);
    return bce_with_logits(logits.col(0), y).first;
  };

  Mlp best = net;
  double best_val = eval_loss(val_x, val_y);
  int best_epoch = -1;  // -1 = untrained initial weights
  int since_best = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    // Fisher-Yates over the row order
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(
          rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    double epoch_loss = 0.0;
    Eigen::Index batches = 0;
    for (Eigen::Index start = 0; start < n;
         start += static_cast<Eigen::Index>(config.batch_size)) {
      const Eigen::Index b =
          std::min<Eigen::Index>(static_cast<Eigen::Index>(config.batch_size), n - start);
      Matrix bx(b, train_x.cols());
      Vector by(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        const Eigen::Index r = order[static_cast<std::size_t>(start + i)];
        bx.row(i) = train_x.row(r);
        by[i] = train_y[r];
      }
      ForwardCache cache;
      const Matrix logits = forward(net, bx, &cache);
      const auto [loss, grad] = bce_with_logits(logits.col(0), by);
      if (!std::isfinite(loss)) {
        throw InputError("baseline: training loss became non-finite at epoch " +
                         std::to_string(epoch));
      }
      const Gradients grads = backward(net, cache, grad);
      adam_step(net, grads, adam, config.learning_rate);
      epoch_loss += loss;
      ++batches;
    }
    const double val_loss = eval_loss(val_x, val_y);
    if (log) {
      log->train_loss.push_back(epoch_loss / static_cast<double>(batches));
      log->val_loss.push_back(val_loss);
    }
    if (val_loss < best_val) {
      best_val = val_loss;
      best = net;
      best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= config.patience) break;
    }
  }
  if (log) log->best_epoch = best_epoch;

  BaselineModel model;
  model.net = std::move(best);
  const Vector val_scores = baseline_scores(model.net, val_x);
  model.threshold = tune_threshold(val_scores, val_y, config.threshold_grid);
  return model;
}

double tune_threshold(const Vector& scores, const Vector& labels, int grid_points) {
  if (scores.size() != labels.size()) {
    throw ShapeError("threshold tuning: scores and labels lengths differ");
  }
  if (scores.size() == 0) throw InputError("threshold tuning: empty inputs");
  if (grid_points < 1) throw ConfigError("threshold tuning: grid must be >= 1");
  double best_threshold = 1.0 / static_cast<double>(grid_points + 1);
  double best_f1 = -1.0;
  for (int k = 1; k <= grid_points; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(grid_points + 1);
    ConfusionCounts c;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      const int pred = scores[i] >= t ? 1 : 0;
      const int y = labels[i] == 1.0 ? 1 : 0;
      if (pred == 1 && y == 1) ++c.tp;
      else if (pred == 1 && y == 0) ++c.fp;
      else if (pred == 0 && y == 0) ++c.tn;
      else ++c.fn;
    }
    const double f1 = f1_score(c);
    if (f1 > best_f1) {  // strict: ties keep the lowest threshold
      best_f1 = f1;
      best_threshold = t;
    }
  }
  return best_threshold;
}

std::vector<int> predict_baseline(const BaselineModel& model, const Matrix& features) {
  const Vector scores = baseline_scores(model.net, features);
  std::vector<int> out(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    out[static_cast<std::size_t>(i)] = scores[i] >= model.threshold ? 1 : 0;
  }
  return out;
}

}  // namespace fraudrl
