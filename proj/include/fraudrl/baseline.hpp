#pragma once

#include "fraudrl/neuralnet.hpp"
#include "fraudrl/types.hpp"

#include <cstdint>
#include <vector>

namespace fraudrl {

struct BaselineConfig {
  std::vector<int> hidden_sizes = {128, 128};
  double learning_rate = 0.0002;
  std::size_t batch_size = 32;
  int max_epochs = 100;
  int patience = 5;          // epochs without val-loss improvement before stopping
  int threshold_grid = 999;  // grid points scanned when tuning the threshold
};

struct BaselineModel {
  Mlp net;           // single logit output; sigmoid applied outside
  double threshold = 0.5;
};

struct BaselineTrainLog {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
  int best_epoch = 0;  // epoch whose weights were kept (0-based)
};

// Fraud probability per row.
Vector baseline_scores(const Mlp& net, const Matrix& features);

// Mean binary cross-entropy on logits plus its gradient (per-logit, already
// divided by the batch size).
std::pair<double, Vector> bce_with_logits(const Vector& logits, const Vector& targets);

// Supervised training with shuffled mini-batches, early stopping on
// validation loss, and best-epoch weight restore.
BaselineModel train_baseline(const Matrix& train_x, const Vector& train_y,
                             const Matrix& val_x, const Vector& val_y,
                             const BaselineConfig& config, std::uint64_t seed,
                             BaselineTrainLog* log = nullptr);

// Scans a uniform threshold grid k/(grid_points+1), k = 1..grid_points
// (0.001..0.999 at the default resolution) and returns the F1-maximising
// threshold on the given scores; ties go to the lowest threshold.
double tune_threshold(const Vector& scores, const Vector& labels, int grid_points = 999);

// 1 (decline) when score >= threshold.
std::vector<int> predict_baseline(const BaselineModel& model, const Matrix& features);

}  // namespace fraudrl
