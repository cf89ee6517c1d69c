// Test-only central-difference oracle. Deliberately independent of the
// reverse-mode code paths it is used to check.
#ifndef NTN_TESTS_FINITE_DIFFERENCE_HPP
#define NTN_TESTS_FINITE_DIFFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <functional>

#include "ntn/diffnet/dense_net.hpp"

namespace ntn::testing {

// d loss / d theta for every parameter of `net`, by central differences.
inline diffnet::Gradients central_difference(diffnet::DenseNet& net, const std::function<double()>& loss,
                                             double h = 1e-5) {
  auto grads = net.zero_gradients();
  auto layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& w = layers[l].weights;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double keep = w.data()[i];
      w.data()[i] = keep + h;
      const double up = loss();
      w.data()[i] = keep - h;
      const double down = loss();
      w.data()[i] = keep;
      grads.weights[l].data()[i] = (up - down) / (2.0 * h);
    }
    auto& b = layers[l].bias;
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const double keep = b(i);
      b(i) = keep + h;
      const double up = loss();
      b(i) = keep - h;
      const double down = loss();
      b(i) = keep;
      grads.bias[l](i) = (up - down) / (2.0 * h);
    }
  }
  return grads;
}

// Relative error with a small absolute floor so exact zeros compare sanely.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_relative_error(const diffnet::Gradients& a, const diffnet::Gradients& b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < a.weights[l].size(); ++i)
      worst = std::max(worst, relative_error(a.weights[l].data()[i], b.weights[l].data()[i], floor));
    for (Eigen::Index i = 0; i < a.bias[l].size(); ++i)
      worst = std::max(worst, relative_error(a.bias[l](i), b.bias[l](i), floor));
  }
  return worst;
}

}  // namespace ntn::testing

#endif
