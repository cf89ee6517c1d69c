#include "doctest.h"

#include <cmath>

#include "../support/finite_difference.hpp"
#include "ntn/common/errors.hpp"
#include "ntn/diffnet/adam.hpp"
#include "ntn/diffnet/dense_net.hpp"

using namespace ntn;
using namespace ntn::diffnet;

namespace {

DenseNet single_layer(Eigen::Index in, Eigen::Index out, Activation act) {
  Rng rng(1);
  return DenseNet({LayerShape{in, out, act}}, rng);
}

}  // namespace

TEST_CASE("identity layer with identity weights passes input through") {
  auto net = single_layer(2, 2, Activation::identity);
  net.layers()[0].weights = Matrix::Identity(2, 2);
  net.layers()[0].bias.setZero();
  const Vector y = net.forward(Vector{{1.0, 2.0}});
  CHECK(y(0) == 1.0);
  CHECK(y(1) == 2.0);
}

TEST_CASE("zero weights return the bias") {
  auto net = single_layer(3, 2, Activation::identity);
  net.layers()[0].weights.setZero();
  net.layers()[0].bias = Vector{{0.5, -1.5}};
  const Vector y = net.forward(Vector{{7.0, -3.0, 11.0}});
  CHECK(y(0) == 0.5);
  CHECK(y(1) == -1.5);
}

TEST_CASE("softmax on constant logits is uniform") {
  auto net = single_layer(1, 4, Activation::softmax);
  net.layers()[0].weights.setZero();
  net.layers()[0].bias.setConstant(3.0);
  const Vector y = net.forward(Vector{{1.0}});
  for (int i = 0; i < 4; ++i) CHECK(y(i) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("softmax output is positive and normalized for wild logits") {
  Matrix logits(5, 3);
  logits << 800, -800, 0, 1, 2, 3, -1e3, 5e2, 1e-9, 0, 0, 0, 3, 3, 3;
  const Matrix p = softmax_columns(logits);
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    CHECK(std::abs(p.col(c).sum() - 1.0) < 1e-9);
    CHECK((p.col(c).array() >= 0.0).all());
  }
  const Matrix q = softmax_columns(Matrix::Random(6, 4) * 5.0);
  CHECK((q.array() > 0.0).all());
}

TEST_CASE("width mismatch is a configuration error") {
  auto net = single_layer(3, 2, Activation::identity);
  CHECK_THROWS_AS(net.forward(Vector(Vector::Zero(2))), ConfigError);
  Rng rng(2);
  CHECK_THROWS_AS(DenseNet({LayerShape{3, 4, Activation::relu}, LayerShape{5, 1, Activation::identity}}, rng),
                  ConfigError);

  GradientTape tape;
  net.forward(Matrix::Zero(3, 2), tape);
  auto g = net.zero_gradients();
  CHECK_THROWS_AS(net.backward(tape, Matrix::Zero(3, 2), g), ConfigError);
}

TEST_CASE("linear scalar net derivative") {
  auto net = single_layer(1, 1, Activation::identity);
  net.layers()[0].weights(0, 0) = 0.7;
  GradientTape tape;
  net.forward(Matrix::Constant(1, 1, 3.0), tape);
  auto g = net.zero_gradients();
  const Matrix dx = net.backward(tape, Matrix::Ones(1, 1), g);
  CHECK(g.weights[0](0, 0) == 3.0);
  CHECK(g.bias[0](0) == 1.0);
  CHECK(dx(0, 0) == doctest::Approx(0.7));
}

TEST_CASE("tanh local derivative at zero is one") {
  auto net = single_layer(1, 1, Activation::tanh);
  net.layers()[0].weights(0, 0) = 1.0;
  net.layers()[0].bias(0) = 0.0;
  GradientTape tape;
  net.forward(Matrix::Zero(1, 1), tape);
  auto g = net.zero_gradients();
  const Matrix dx = net.backward(tape, Matrix::Ones(1, 1), g);
  CHECK(dx(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("reverse-mode gradients match central differences for every activation") {
  for (auto act : {Activation::identity, Activation::relu, Activation::tanh, Activation::sigmoid, Activation::exp,
                   Activation::softmax}) {
    CAPTURE(to_string(act));
    for (int trial = 0; trial < 4; ++trial) {
      Rng rng(100 + trial);
      const auto hidden = act == Activation::softmax ? Activation::tanh : act;
      DenseNet net({LayerShape{3, 5, hidden}, LayerShape{5, 4, act}}, rng);
      const Matrix x = standard_normal(3, 2, rng);
      const Matrix w = standard_normal(4, 2, rng);
      auto loss = [&] { return (net.forward(x).array() * w.array()).sum(); };

      GradientTape tape;
      net.forward(x, tape);
      auto analytic = net.zero_gradients();
      net.backward(tape, w, analytic);
      const auto numeric = testing::central_difference(net, loss);
      CHECK(testing::max_relative_error(analytic, numeric) < 1e-4);
    }
  }
}

TEST_CASE("forward and gradients are bit-identical for identical seeds") {
  auto make = [] {
    Rng rng(77);
    return DenseNet({LayerShape{4, 8, Activation::tanh}, LayerShape{8, 3, Activation::softmax}}, rng);
  };
  const auto a = make();
  const auto b = make();
  Rng r1(5), r2(5);
  const Matrix x1 = standard_normal(4, 3, r1), x2 = standard_normal(4, 3, r2);
  GradientTape ta, tb;
  CHECK(a.forward(x1, ta) == b.forward(x2, tb));
  auto ga = a.zero_gradients(), gb = b.zero_gradients();
  a.backward(ta, Matrix::Ones(3, 3), ga);
  b.backward(tb, Matrix::Ones(3, 3), gb);
  for (std::size_t l = 0; l < ga.weights.size(); ++l) {
    CHECK(ga.weights[l] == gb.weights[l]);
    CHECK(ga.bias[l] == gb.bias[l]);
  }
}

TEST_CASE("replaying a tape is side-effect free") {
  Rng rng(8);
  DenseNet net({LayerShape{2, 3, Activation::relu}, LayerShape{3, 1, Activation::identity}}, rng);
  GradientTape tape;
  net.forward(standard_normal(2, 4, rng), tape);
  auto g1 = net.zero_gradients(), g2 = net.zero_gradients();
  net.backward(tape, Matrix::Ones(1, 4), g1);
  net.backward(tape, Matrix::Ones(1, 4), g2);
  CHECK(g1.weights[0] == g2.weights[0]);
  CHECK(g1.bias[1] == g2.bias[1]);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  auto net = single_layer(2, 2, Activation::identity);
  const Matrix before = net.layers()[0].weights;
  Adam opt(net);
  opt.step(net, net.zero_gradients(), 1e-2);
  CHECK(net.layers()[0].weights == before);
}

TEST_CASE("adam: constant positive gradient strictly decreases the parameter") {
  auto net = single_layer(1, 1, Activation::identity);
  Adam opt(net);
  auto g = net.zero_gradients();
  g.weights[0](0, 0) = 0.3;
  double prev = net.layers()[0].weights(0, 0);
  for (int i = 0; i < 50; ++i) {
    opt.step(net, g, 1e-3);
    const double now = net.layers()[0].weights(0, 0);
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("adam: quadratic bowl converges") {
  auto net = single_layer(1, 1, Activation::identity);
  net.layers()[0].weights(0, 0) = 1.0;
  Adam opt(net);
  for (int i = 0; i < 200; ++i) {
    auto g = net.zero_gradients();
    g.weights[0](0, 0) = 2.0 * net.layers()[0].weights(0, 0);
    opt.step(net, g, 0.1);
  }
  CHECK(std::abs(net.layers()[0].weights(0, 0)) < 1e-2);
}

TEST_CASE("adam: non-finite gradient reports the layer") {
  Rng rng(3);
  DenseNet net({LayerShape{2, 2, Activation::relu}, LayerShape{2, 1, Activation::identity}}, rng);
  Adam opt(net);
  auto g = net.zero_gradients();
  g.bias[1](0) = std::nan("");
  try {
    opt.step(net, g, 1e-3);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    REQUIRE(e.where().has_value());
    CHECK(*e.where() == 1);
  }
}

TEST_CASE("soft update with tau = 1 copies and contracts otherwise") {
  Rng rng(4);
  DenseNet online({LayerShape{3, 3, Activation::tanh}}, rng);
  DenseNet target({LayerShape{3, 3, Activation::tanh}}, rng);
  const double gap0 = (online.layers()[0].weights - target.layers()[0].weights).norm();
  target.soft_update_from(online, 0.005);
  const double gap1 = (online.layers()[0].weights - target.layers()[0].weights).norm();
  CHECK(gap1 == doctest::Approx(0.995 * gap0).epsilon(1e-12));
  target.soft_update_from(online, 1.0);
  CHECK(target.layers()[0].weights == online.layers()[0].weights);
}
