#include "fraudrl/neuralnet.hpp"

#include "fraudrl/errors.hpp"
#include "fraudrl/rng.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fraudrl {

namespace {

void require_shape_mirror(const Mlp& net, const std::vector<Matrix>& mats,
                          const std::vector<Vector>& vecs, const char* what) {
  if (mats.size() != net.weights.size() || vecs.size() != net.biases.size()) {
    throw ShapeError(std::string(what) + ": layer count mismatch");
  }
  for (std::size_t i = 0; i < mats.size(); ++i) {
    if (mats[i].rows() != net.weights[i].rows() || mats[i].cols() != net.weights[i].cols() ||
        vecs[i].size() != net.biases[i].size()) {
      throw ShapeError(std::string(what) + ": shape mismatch at layer " + std::to_string(i));
    }
  }
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    n += static_cast<std::size_t>(weights[i].size()) + static_cast<std::size_t>(biases[i].size());
  }
  return n;
}

Mlp mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw ConfigError("mlp_init: need at least input and output layer sizes");
  }
  for (int s : layer_sizes) {
    if (s < 1) throw ConfigError("mlp_init: layer sizes must be positive");
  }
  Mlp net;
  net.layer_sizes = layer_sizes;
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    const int fan_in = layer_sizes[i];
    const int fan_out = layer_sizes[i + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) {
        w(r, c) = rng.uniform(-limit, limit);
      }
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(fan_out));
  }
  return net;
}

Matrix forward(const Mlp& net, const Matrix& batch, ForwardCache* cache) {
  if (batch.cols() != net.input_size()) {
    throw ShapeError("forward: batch width " + std::to_string(batch.cols()) +
                     " does not match network input size " + std::to_string(net.input_size()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix x = batch;
  const std::size_t n_layers = net.layer_count();
  for (std::size_t i = 0; i < n_layers; ++i) {
    if (cache) cache->inputs.push_back(x);
    Matrix z = x * net.weights[i].transpose();
    z.rowwise() += net.biases[i].transpose();
    if (cache) cache->pre.push_back(z);
    if (i + 1 < n_layers) {
      x = z.cwiseMax(0.0);  // relu on hidden layers
    } else {
      x = std::move(z);  // identity output
    }
  }
  return x;
}

std::pair<double, Vector> huber_loss(const Vector& pred, const Vector& target, double delta) {
  if (pred.size() != target.size()) {
    throw ShapeError("huber_loss: pred and target lengths differ");
  }
  if (delta <= 0.0) throw InputError("huber_loss: delta must be positive");
  const auto n = pred.size();
  double loss = 0.0;
  Vector grad(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = pred[i] - target[i];
    const double abs_e = std::abs(e);
    if (abs_e <= delta) {
      loss += 0.5 * e * e;
      grad[i] = e;
    } else {
      loss += delta * (abs_e - 0.5 * delta);
      grad[i] = e > 0.0 ? delta : -delta;
    }
  }
  loss /= static_cast<double>(n);
  grad /= static_cast<double>(n);
  return {loss, grad};
}

Gradients backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad) {
  const std::size_t n_layers = net.layer_count();
  if (cache.inputs.size() != n_layers || cache.pre.size() != n_layers) {
    throw ShapeError("backward: cache does not match network layer count");
  }
  if (output_grad.rows() != cache.pre.back().rows() ||
      output_grad.cols() != net.output_size()) {
    throw ShapeError("backward: output_grad shape does not match cached forward pass");
  }
  for (std::size_t i = 0; i < n_layers; ++i) {
    if (cache.inputs[i].cols() != net.layer_sizes[i] ||
        cache.pre[i].cols() != net.layer_sizes[i + 1]) {
      throw ShapeError("backward: cached activations do not match network shapes");
    }
  }

  Gradients grads;
  grads.weights.resize(n_layers);
  grads.biases.resize(n_layers);
  Matrix delta = output_grad;  // output activation is identity
  for (std::size_t li = n_layers; li-- > 0;) {
    grads.weights[li].noalias() = delta.transpose() * cache.inputs[li];
    grads.biases[li] = delta.colwise().sum();
    if (li > 0) {
      Matrix upstream = delta * net.weights[li];
      delta = upstream.cwiseProduct(
          (cache.pre[li - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

AdamState adam_init(const Mlp& net, double beta1, double beta2, double epsilon) {
  AdamState st;
  st.beta1 = beta1;
  st.beta2 = beta2;
  st.epsilon = epsilon;
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    st.m_weights.push_back(Matrix::Zero(net.weights[i].rows(), net.weights[i].cols()));
    st.v_weights.push_back(Matrix::Zero(net.weights[i].rows(), net.weights[i].cols()));
    st.m_biases.push_back(Vector::Zero(net.biases[i].size()));
    st.v_biases.push_back(Vector::Zero(net.biases[i].size()));
  }
  return st;
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state, double lr) {
  if (lr <= 0.0) throw InputError("adam_step: learning rate must be positive");
  require_shape_mirror(net, grads.weights, grads.biases, "adam_step gradients");
  require_shape_mirror(net, state.m_weights, state.m_biases, "adam_step state");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
      m = state.beta1 * m + (1.0 - state.beta1) * grad;
      v = state.beta2 * v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
      param.array() -=
          lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.epsilon);
    };
    update(net.weights[i], grads.weights[i], state.m_weights[i], state.v_weights[i]);
    update(net.biases[i], grads.biases[i], state.m_biases[i], state.v_biases[i]);
  }
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  }
  return arr;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Matrix matrix_from_json(const json& arr, Eigen::Index rows, Eigen::Index cols,
                        const char* what) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols) {
    throw CheckpointError(std::string("checkpoint: ") + what + " has inconsistent shape");
  }
  Matrix m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = arr[k++].get<double>();
  }
  return m;
}

Vector vector_from_json(const json& arr, Eigen::Index size, const char* what) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != size) {
    throw CheckpointError(std::string("checkpoint: ") + what + " has inconsistent shape");
  }
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = arr[i].get<double>();
  return v;
}

void require_keys(const json& obj, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const char* where) {
  for (const char* k : required) {
    if (!obj.contains(k)) {
      throw CheckpointError(std::string("checkpoint: missing key '") + k + "' in " + where);
    }
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string& k = it.key();
    auto in = [&](std::initializer_list<const char*> list) {
      for (const char* c : list) {
        if (k == c) return true;
      }
      return false;
    };
    if (!in(required) && !in(optional)) {
      throw CheckpointError("checkpoint: unknown key '" + k + "' in " + where);
    }
  }
}

}  // namespace

void checkpoint_save(const std::string& path, const Mlp& net, const AdamState* adam,
                     const std::string& head, std::optional<double> threshold) {
  json doc;
  doc["format_version"] = 1;
  doc["layer_sizes"] = net.layer_sizes;
  doc["activation"] = "relu";
  json layers = json::array();
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    json layer;
    layer["weights"] = matrix_to_json(net.weights[i]);
    layer["biases"] = vector_to_json(net.biases[i]);
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  if (adam) {
    json a;
    a["beta1"] = adam->beta1;
    a["beta2"] = adam->beta2;
    a["epsilon"] = adam->epsilon;
    a["step"] = adam->step;
    json moments = json::array();
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
      json m;
      m["m_weights"] = matrix_to_json(adam->m_weights[i]);
      m["v_weights"] = matrix_to_json(adam->v_weights[i]);
      m["m_biases"] = vector_to_json(adam->m_biases[i]);
      m["v_biases"] = vector_to_json(adam->v_biases[i]);
      moments.push_back(std::move(m));
    }
    a["layers"] = std::move(moments);
    doc["adam"] = std::move(a);
  }
  if (!head.empty()) doc["head"] = head;
  if (threshold) doc["threshold"] = *threshold;

  std::ofstream out(path);
  if (!out) throw CheckpointError("checkpoint: cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw CheckpointError("checkpoint: write to '" + path + "' failed");
}

Checkpoint checkpoint_load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("checkpoint: cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint: '" + path + "' is corrupt: " + e.what());
  }
  if (!doc.is_object()) throw CheckpointError("checkpoint: document is not an object");
  require_keys(doc, {"format_version", "layer_sizes", "activation", "layers"},
               {"adam", "head", "threshold"}, "document");
  if (doc["format_version"].get<int>() != 1) {
    throw CheckpointError("checkpoint: unsupported format_version " +
                          doc["format_version"].dump());
  }
  if (doc["activation"].get<std::string>() != "relu") {
    throw CheckpointError("checkpoint: unsupported activation '" +
                          doc["activation"].get<std::string>() + "'");
  }

  Checkpoint cp;
  cp.net.layer_sizes = doc["layer_sizes"].get<std::vector<int>>();
  if (cp.net.layer_sizes.size() < 2) {
    throw CheckpointError("checkpoint: layer_sizes needs at least two entries");
  }
  for (int s : cp.net.layer_sizes) {
    if (s < 1) throw CheckpointError("checkpoint: non-positive layer size");
  }
  const auto& layers = doc["layers"];
  if (!layers.is_array() || layers.size() != cp.net.layer_sizes.size() - 1) {
    throw CheckpointError("checkpoint: layer count does not match layer_sizes");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    require_keys(layers[i], {"weights", "biases"}, {}, "layers entry");
    const Eigen::Index out_dim = cp.net.layer_sizes[i + 1];
    const Eigen::Index in_dim = cp.net.layer_sizes[i];
    cp.net.weights.push_back(matrix_from_json(layers[i]["weights"], out_dim, in_dim, "weights"));
    cp.net.biases.push_back(vector_from_json(layers[i]["biases"], out_dim, "biases"));
  }
  if (doc.contains("adam")) {
    const auto& a = doc["adam"];
    require_keys(a, {"beta1", "beta2", "epsilon", "step", "layers"}, {}, "adam");
    AdamState st;
    st.beta1 = a["beta1"].get<double>();
    st.beta2 = a["beta2"].get<double>();
    st.epsilon = a["epsilon"].get<double>();
    st.step = a["step"].get<std::uint64_t>();
    const auto& moments = a["layers"];
    if (!moments.is_array() || moments.size() != cp.net.layer_count()) {
      throw CheckpointError("checkpoint: adam layer count mismatch");
    }
    for (std::size_t i = 0; i < moments.size(); ++i) {
      require_keys(moments[i], {"m_weights", "v_weights", "m_biases", "v_biases"}, {},
                   "adam layers entry");
      const Eigen::Index out_dim = cp.net.layer_sizes[i + 1];
      const Eigen::Index in_dim = cp.net.layer_sizes[i];
      st.m_weights.push_back(matrix_from_json(moments[i]["m_weights"], out_dim, in_dim, "m_weights"));
      st.v_weights.push_back(matrix_from_json(moments[i]["v_weights"], out_dim, in_dim, "v_weights"));
      st.m_biases.push_back(vector_from_json(moments[i]["m_biases"], out_dim, "m_biases"));
      st.v_biases.push_back(vector_from_json(moments[i]["v_biases"], out_dim, "v_biases"));
    }
    cp.adam = std::move(st);
  }
  if (doc.contains("head")) cp.head = doc["head"].get<std::string>();
  if (doc.contains("threshold")) cp.threshold = doc["threshold"].get<double>();
  return cp;
}

}  // namespace fraudrl
