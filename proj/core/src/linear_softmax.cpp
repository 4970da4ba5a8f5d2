#include "metafill/linear_softmax.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metafill {

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (auto& x : p) x /= total;
  return p;
}

std::vector<double> LinearSoftmax::logits(std::span<const double> x) const {
  if (x.size() != inputs)
    throw std::invalid_argument("feature dimension " + std::to_string(x.size()) + " != " +
                                std::to_string(inputs));
  std::vector<double> z(bias);
  for (std::size_t c = 0; c < classes; ++c) {
    const double* w = weight.data() + c * inputs;
    double s = 0.0;
    for (std::size_t i = 0; i < inputs; ++i) s += w[i] * x[i];
    z[c] += s;
  }
  return z;
}

std::vector<double> LinearSoftmax::probabilities(std::span<const double> x) const {
  return softmax(logits(x));
}

double LinearSoftmax::loss(std::span<const double> x, std::size_t target, double scale,
                           LinearSoftmax* grad, std::span<double> dx) const {
  if (target >= classes) throw std::invalid_argument("target class out of range");
  auto z = logits(x);
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (auto v : z) total += std::exp(v - top);
  const double log_norm = top + std::log(total);
  const double value = log_norm - z[target];
  if (grad || !dx.empty()) {
    for (std::size_t c = 0; c < classes; ++c) {
      double delta = scale * (std::exp(z[c] - log_norm) - (c == target ? 1.0 : 0.0));
      const double* w = weight.data() + c * inputs;
      if (grad) {
        double* gw = grad->weight.data() + c * inputs;
        for (std::size_t i = 0; i < inputs; ++i) gw[i] += delta * x[i];
        grad->bias[c] += delta;
      }
      if (!dx.empty())
        for (std::size_t i = 0; i < inputs; ++i) dx[i] += delta * w[i];
    }
  }
  return value;
}

void LinearSoftmax::axpy(double alpha, const LinearSoftmax& other) {
  for (std::size_t i = 0; i < weight.size(); ++i) weight[i] += alpha * other.weight[i];
  for (std::size_t i = 0; i < bias.size(); ++i) bias[i] += alpha * other.bias[i];
}

void LinearSoftmax::zero() {
  std::fill(weight.begin(), weight.end(), 0.0);
  std::fill(bias.begin(), bias.end(), 0.0);
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace metafill
