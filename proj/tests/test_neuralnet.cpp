#include "doctest.h"

#include "fraudrl/errors.hpp"
#include "fraudrl/neuralnet.hpp"
#include "fraudrl/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

using namespace fraudrl;

namespace {

// Straight-line reimplementation of the forward pass: explicit loops, no
// Eigen products, used as an independent oracle.
Matrix naive_forward(const Mlp& net, const Matrix& batch) {
  Matrix x = batch;
  for (std::size_t li = 0; li < net.layer_count(); ++li) {
    const Matrix& w = net.weights[li];
    Matrix z(x.rows(), w.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index o = 0; o < w.rows(); ++o) {
        double acc = net.biases[li][o];
        for (Eigen::Index i = 0; i < w.cols(); ++i) acc += x(r, i) * w(o, i);
        z(r, o) = acc;
      }
    }
    if (li + 1 < net.layer_count()) {
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        for (Eigen::Index o = 0; o < z.cols(); ++o) z(r, o) = std::max(z(r, o), 0.0);
      }
    }
    x = z;
  }
  return x;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

// Scalar probe loss L = sum_ij G_ij * out_ij, whose output gradient is G.
double probe_loss(const Mlp& net, const Matrix& batch, const Matrix& g) {
  return (forward(net, batch).array() * g.array()).sum();
}

std::string temp_path(const char* name) {
  return std::string("/tmp/fraudrl_test_") + name;
}

}  // namespace

TEST_CASE("init produces the documented shapes with zero biases") {
  const Mlp net = mlp_init({30, 128, 128, 2}, 7);
  REQUIRE(net.layer_count() == 3);
  CHECK(net.weights[0].rows() == 128);
  CHECK(net.weights[0].cols() == 30);
  CHECK(net.weights[1].rows() == 128);
  CHECK(net.weights[1].cols() == 128);
  CHECK(net.weights[2].rows() == 2);
  CHECK(net.weights[2].cols() == 128);
  for (const Vector& b : net.biases) CHECK(b.isZero(0.0));
  CHECK(net.input_size() == 30);
  CHECK(net.output_size() == 2);
  CHECK(net.parameter_count() == 30 * 128 + 128 + 128 * 128 + 128 + 128 * 2 + 2);
}

TEST_CASE("minimal one-weight net") {
  const Mlp net = mlp_init({1, 1}, 0);
  REQUIRE(net.layer_count() == 1);
  CHECK(net.weights[0].rows() == 1);
  CHECK(net.weights[0].cols() == 1);
  CHECK(net.biases[0][0] == 0.0);
}

TEST_CASE("init is deterministic per seed and bounded by the fan rule") {
  const Mlp a = mlp_init({5, 8, 3}, 123);
  const Mlp b = mlp_init({5, 8, 3}, 123);
  const Mlp c = mlp_init({5, 8, 3}, 124);
  CHECK(a.weights[0] == b.weights[0]);
  CHECK(a.weights[1] == b.weights[1]);
  CHECK(a.weights[0] != c.weights[0]);
  const double bound0 = std::sqrt(6.0 / (5 + 8));
  CHECK(a.weights[0].cwiseAbs().maxCoeff() <= bound0);
}

TEST_CASE("init rejects bad layer lists") {
  CHECK_THROWS_AS(mlp_init({}, 1), ConfigError);
  CHECK_THROWS_AS(mlp_init({4}, 1), ConfigError);
  CHECK_THROWS_AS(mlp_init({4, 0, 2}, 1), ConfigError);
  CHECK_THROWS_AS(mlp_init({4, -1}, 1), ConfigError);
}

TEST_CASE("zero parameters give zero outputs") {
  Mlp net = mlp_init({3, 4, 2}, 5);
  for (Matrix& w : net.weights) w.setZero();
  Rng rng(2);
  const Matrix batch = random_matrix(6, 3, rng);
  CHECK(forward(net, batch).isZero(0.0));
}

TEST_CASE("relu kills a negative pass-through chain") {
  Mlp net = mlp_init({1, 1, 1}, 5);
  net.weights[0](0, 0) = 1.0;
  net.weights[1](0, 0) = 1.0;
  Matrix batch(1, 1);
  batch(0, 0) = -3.0;
  CHECK(forward(net, batch)(0, 0) == 0.0);
  batch(0, 0) = 3.0;
  CHECK(forward(net, batch)(0, 0) == 3.0);
}

TEST_CASE("forward matches the hand-rolled oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Mlp net = mlp_init({4, 7, 5, 3}, 1000 + trial);
    const Matrix batch = random_matrix(5, 4, rng);
    const Matrix got = forward(net, batch);
    const Matrix want = naive_forward(net, batch);
    CHECK((got - want).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, want.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("forward rejects width mismatch") {
  const Mlp net = mlp_init({4, 3, 2}, 1);
  Matrix batch(2, 5);
  batch.setZero();
  CHECK_THROWS_AS(forward(net, batch), ShapeError);
}

TEST_CASE("huber hand values") {
  Vector pred(1), target(1);
  pred << 0.0;
  target << 0.0;
  auto [l0, g0] = huber_loss(pred, target, 1.0);
  CHECK(l0 == 0.0);
  CHECK(g0[0] == 0.0);

  pred << 0.5;
  auto [l1, g1] = huber_loss(pred, target, 1.0);
  CHECK(l1 == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(g1[0] == doctest::Approx(0.5).epsilon(1e-15));

  pred << 3.0;
  auto [l2, g2] = huber_loss(pred, target, 1.0);
  CHECK(l2 == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(g2[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("huber mean-reduces over the vector") {
  Vector pred(2), target(2);
  pred << 0.5, 3.0;
  target << 0.0, 0.0;
  auto [loss, grad] = huber_loss(pred, target, 1.0);
  CHECK(loss == doctest::Approx((0.125 + 2.5) / 2).epsilon(1e-15));
  CHECK(grad[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(grad[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("huber is symmetric and respects delta") {
  Vector pred(1), target(1);
  pred << -3.0;
  target << 0.0;
  auto [loss, grad] = huber_loss(pred, target, 1.0);
  CHECK(loss == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(grad[0] == doctest::Approx(-1.0).epsilon(1e-15));
  auto [loss2, grad2] = huber_loss(pred, target, 5.0);  // quadratic branch now
  CHECK(loss2 == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(grad2[0] == doctest::Approx(-3.0).epsilon(1e-15));
}

TEST_CASE("huber rejects mismatched lengths and bad delta") {
  Vector a(2), b(3);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(huber_loss(a, b, 1.0), ShapeError);
  Vector c(2);
  c.setZero();
  CHECK_THROWS_AS(huber_loss(a, c, 0.0), InputError);
}

TEST_CASE("zero output gradient backpropagates to zero") {
  const Mlp net = mlp_init({3, 5, 2}, 9);
  Rng rng(4);
  const Matrix batch = random_matrix(4, 3, rng);
  ForwardCache cache;
  forward(net, batch, &cache);
  Matrix g(4, 2);
  g.setZero();
  const Gradients grads = backward(net, cache, g);
  for (const Matrix& w : grads.weights) CHECK(w.isZero(0.0));
  for (const Vector& b : grads.biases) CHECK(b.isZero(0.0));
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(17);
  int done = 0;
  std::uint64_t seed = 5000;
  while (done < 8) {
    const Mlp net = mlp_init({3, 6, 4, 2}, seed++);
    const Matrix batch = random_matrix(3, 3, rng);
    ForwardCache cache;
    forward(net, batch, &cache);
    // Stay away from relu kinks so the finite-difference quotient is valid.
    double kink = 1e9;
    for (std::size_t li = 0; li + 1 < cache.pre.size(); ++li) {
      kink = std::min(kink, cache.pre[li].cwiseAbs().minCoeff());
    }
    if (kink < 1e-3) continue;
    ++done;

    const Matrix g = random_matrix(3, 2, rng);
    const Gradients grads = backward(net, cache, g);

    const double h = 1e-5;
    Mlp probe = net;
    for (std::size_t li = 0; li < net.layer_count(); ++li) {
      for (Eigen::Index r = 0; r < net.weights[li].rows(); ++r) {
        for (Eigen::Index c = 0; c < net.weights[li].cols(); ++c) {
          probe.weights[li](r, c) = net.weights[li](r, c) + h;
          const double up = probe_loss(probe, batch, g);
          probe.weights[li](r, c) = net.weights[li](r, c) - h;
          const double down = probe_loss(probe, batch, g);
          probe.weights[li](r, c) = net.weights[li](r, c);
          const double fd = (up - down) / (2 * h);
          const double an = grads.weights[li](r, c);
          CHECK(std::abs(an - fd) <=
                std::max(1e-7, 1e-4 * std::max(std::abs(an), std::abs(fd))));
        }
      }
      for (Eigen::Index r = 0; r < net.biases[li].size(); ++r) {
        probe.biases[li][r] = net.biases[li][r] + h;
        const double up = probe_loss(probe, batch, g);
        probe.biases[li][r] = net.biases[li][r] - h;
        const double down = probe_loss(probe, batch, g);
        probe.biases[li][r] = net.biases[li][r];
        const double fd = (up - down) / (2 * h);
        const double an = grads.biases[li][r];
        CHECK(std::abs(an - fd) <=
              std::max(1e-7, 1e-4 * std::max(std::abs(an), std::abs(fd))));
      }
    }
  }
}

TEST_CASE("duplicated batch rows keep the mean-reduced gradient") {
  const Mlp net = mlp_init({3, 4, 2}, 77);
  Rng rng(8);
  const Matrix row = random_matrix(1, 3, rng);
  const Matrix g_row = random_matrix(1, 2, rng);

  ForwardCache cache1;
  forward(net, row, &cache1);
  const Gradients single = backward(net, cache1, g_row);

  Matrix batch(4, 3);
  Matrix g4(4, 2);
  for (int r = 0; r < 4; ++r) {
    batch.row(r) = row.row(0);
    g4.row(r) = g_row.row(0) / 4.0;  // mean reduction spreads the same weight
  }
  ForwardCache cache4;
  forward(net, batch, &cache4);
  const Gradients quad = backward(net, cache4, g4);

  for (std::size_t li = 0; li < net.layer_count(); ++li) {
    CHECK((single.weights[li] - quad.weights[li]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((single.biases[li] - quad.biases[li]).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("adam leaves parameters alone on zero gradients") {
  Mlp net = mlp_init({2, 3, 1}, 3);
  const Mlp before = net;
  AdamState state = adam_init(net);
  Gradients grads;
  for (const Matrix& w : net.weights) grads.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const Vector& b : net.biases) grads.biases.push_back(Vector::Zero(b.size()));
  adam_step(net, grads, state, 0.01);
  for (std::size_t li = 0; li < net.layer_count(); ++li) {
    CHECK(net.weights[li] == before.weights[li]);
    CHECK(net.biases[li] == before.biases[li]);
  }
  CHECK(state.step == 1);
}

TEST_CASE("first adam step moves a scalar parameter by about lr") {
  Mlp net;
  net.layer_sizes = {1, 1};
  net.weights = {Matrix::Constant(1, 1, 0.7)};
  net.biases = {Vector::Zero(1)};
  AdamState state = adam_init(net);
  Gradients grads;
  grads.weights = {Matrix::Constant(1, 1, 1.0)};
  grads.biases = {Vector::Zero(1)};
  adam_step(net, grads, state, 0.01);
  // Bias-corrected m-hat = v-hat = 1, so the step is lr / (1 + eps).
  CHECK(net.weights[0](0, 0) == doctest::Approx(0.7 - 0.01).epsilon(1e-6));
}

TEST_CASE("adam second step follows the recurrence exactly") {
  Mlp net;
  net.layer_sizes = {1, 1};
  net.weights = {Matrix::Constant(1, 1, 0.0)};
  net.biases = {Vector::Zero(1)};
  AdamState state = adam_init(net);
  Gradients g1;
  g1.weights = {Matrix::Constant(1, 1, 0.5)};
  g1.biases = {Vector::Zero(1)};
  adam_step(net, g1, state, 0.1);

  // Hand recurrence, spelled out scalar by scalar.
  double m = 0.1 * 0.5, v = 0.001 * 0.25;
  double w = 0.0 - 0.1 * (m / (1 - 0.9)) / (std::sqrt(v / (1 - 0.999)) + 1e-8);
  CHECK(net.weights[0](0, 0) == doctest::Approx(w).epsilon(1e-12));

  Gradients g2;
  g2.weights = {Matrix::Constant(1, 1, -0.25)};
  g2.biases = {Vector::Zero(1)};
  adam_step(net, g2, state, 0.1);
  m = 0.9 * m + 0.1 * (-0.25);
  v = 0.999 * v + 0.001 * 0.0625;
  w = w - 0.1 * (m / (1 - 0.9 * 0.9)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  CHECK(net.weights[0](0, 0) == doctest::Approx(w).epsilon(1e-12));
  CHECK(state.step == 2);
}

TEST_CASE("adam is bitwise deterministic") {
  auto run = [] {
    Mlp net = mlp_init({3, 5, 2}, 6);
    AdamState state = adam_init(net);
    Rng rng(10);
    for (int i = 0; i < 20; ++i) {
      Gradients grads;
      for (const Matrix& w : net.weights)
        grads.weights.push_back(random_matrix(w.rows(), w.cols(), rng));
      for (const Vector& b : net.biases) {
        Vector g(b.size());
        for (Eigen::Index r = 0; r < b.size(); ++r) g[r] = rng.uniform(-1, 1);
        grads.biases.push_back(g);
      }
      adam_step(net, grads, state, 0.01);
    }
    return net;
  };
  const Mlp a = run();
  const Mlp b = run();
  for (std::size_t li = 0; li < a.layer_count(); ++li) {
    CHECK(a.weights[li] == b.weights[li]);
    CHECK(a.biases[li] == b.biases[li]);
  }
}

TEST_CASE("checkpoint round-trips the forward map and optimizer state") {
  const std::string path = temp_path("ckpt_roundtrip.json");
  Mlp net = mlp_init({4, 6, 2}, 44);
  AdamState state = adam_init(net);
  Rng rng(12);
  for (int i = 0; i < 3; ++i) {
    Gradients grads;
    for (const Matrix& w : net.weights)
      grads.weights.push_back(random_matrix(w.rows(), w.cols(), rng));
    for (const Vector& b : net.biases) {
      Vector g(b.size());
      for (Eigen::Index r = 0; r < b.size(); ++r) g[r] = rng.uniform(-1, 1);
      grads.biases.push_back(g);
    }
    adam_step(net, grads, state, 0.02);
  }
  checkpoint_save(path, net, &state);
  const Checkpoint loaded = checkpoint_load(path);

  const Matrix probe = random_matrix(5, 4, rng);
  CHECK(forward(net, probe) == forward(loaded.net, probe));
  REQUIRE(loaded.adam.has_value());
  CHECK(loaded.adam->step == state.step);
  CHECK(loaded.adam->m_weights[0] == state.m_weights[0]);
  CHECK(loaded.adam->v_weights[1] == state.v_weights[1]);
  CHECK(loaded.head.empty());
  CHECK_FALSE(loaded.threshold.has_value());
  std::remove(path.c_str());
}

TEST_CASE("checkpoint keeps sigmoid head and threshold") {
  const std::string path = temp_path("ckpt_head.json");
  const Mlp net = mlp_init({4, 3, 1}, 2);
  checkpoint_save(path, net, nullptr, "sigmoid", 0.35);
  const Checkpoint loaded = checkpoint_load(path);
  CHECK(loaded.head == "sigmoid");
  REQUIRE(loaded.threshold.has_value());
  CHECK(*loaded.threshold == 0.35);
  CHECK_FALSE(loaded.adam.has_value());
  std::remove(path.c_str());
}

TEST_CASE("truncated checkpoint fails to load") {
  const std::string path = temp_path("ckpt_trunc.json");
  checkpoint_save(path, mlp_init({3, 2}, 1));
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  std::ofstream out(path, std::ios::trunc);
  out << text.substr(0, text.size() / 2);
  out.close();
  CHECK_THROWS_AS(checkpoint_load(path), CheckpointError);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint load rejects tampered structure") {
  const std::string path = temp_path("ckpt_bad.json");
  auto write = [&](const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
  };

  write("{}");
  CHECK_THROWS_AS(checkpoint_load(path), CheckpointError);

  // Wrong version.
  write(R"({"format_version":2,"layer_sizes":[1,1],"activation":"relu",)"
        R"("layers":[{"weights":[[1.0]],"biases":[0.0]}]})");
  CHECK_THROWS_AS(checkpoint_load(path), CheckpointError);

  // Weight shape contradicts layer_sizes.
  write(R"({"format_version":1,"layer_sizes":[2,1],"activation":"relu",)"
        R"("layers":[{"weights":[[1.0]],"biases":[0.0]}]})");
  CHECK_THROWS_AS(checkpoint_load(path), CheckpointError);

  // Unknown key.
  write(R"({"format_version":1,"layer_sizes":[1,1],"activation":"relu",)"
        R"("layers":[{"weights":[[1.0]],"biases":[0.0]}],"extra":true})");
  CHECK_THROWS_AS(checkpoint_load(path), CheckpointError);

  CHECK_THROWS_AS(checkpoint_load("/tmp/fraudrl_no_such_checkpoint.json"),
                  CheckpointError);
  std::remove(path.c_str());
}
