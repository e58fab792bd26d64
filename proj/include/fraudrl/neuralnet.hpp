#pragma once

#include "fraudrl/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fraudrl {

// Dense feedforward network with relu on hidden layers and an identity
// output layer. weights[i] maps layer_sizes[i] -> layer_sizes[i+1] and is
// stored [out x in].
struct Mlp {
  std::vector<int> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;
};

// Per-parameter partials of a scalar loss, shaped like the Mlp.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

// Adam moment accumulators shaped like the Mlp parameters.
struct AdamState {
  std::vector<Matrix> m_weights, v_weights;
  std::vector<Vector> m_biases, v_biases;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Activations recorded by forward() for use in backward().
// inputs[i] is the batch entering layer i (inputs[0] is the raw batch),
// pre[i] the pre-activation of layer i.
struct ForwardCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre;
};

// Scaled uniform init: weights ~ U(-sqrt(6/(fan_in+fan_out)), +...), biases
// zero. Deterministic for a fixed seed (row-major fill order per layer).
Mlp mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed);

// batch is [B x input_size]; returns [B x output_size]. Pass a cache to
// record activations for backward().
Matrix forward(const Mlp& net, const Matrix& batch, ForwardCache* cache = nullptr);

// Elementwise Huber loss averaged over the vector, plus d(loss)/d(pred).
std::pair<double, Vector> huber_loss(const Vector& pred, const Vector& target, double delta);

// Chain rule through the cached forward pass. output_grad is d(loss)/d(outputs),
// [B x output_size]; the scalar loss itself is whatever the caller reduced.
Gradients backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad);

AdamState adam_init(const Mlp& net, double beta1 = 0.9, double beta2 = 0.999,
                    double epsilon = 1e-8);

// Bias-corrected Adam update in place; increments state.step.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state, double lr);

// Versioned JSON checkpoint. `head` tags the output head ("sigmoid" for the
// supervised baseline); empty means a plain Q head and the key is omitted.
// `threshold` is stored for sigmoid heads that carry a tuned decision cut.
struct Checkpoint {
  Mlp net;
  std::optional<AdamState> adam;
  std::string head;
  std::optional<double> threshold;
};

void checkpoint_save(const std::string& path, const Mlp& net,
                     const AdamState* adam = nullptr, const std::string& head = "",
                     std::optional<double> threshold = std::nullopt);
Checkpoint checkpoint_load(const std::string& path);

}  // namespace fraudrl
