#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace metafill {

std::vector<double> softmax(std::span<const double> logits);

// Affine map followed by softmax: p = Softmax(W x + b), W is classes x inputs
// row-major.
struct LinearSoftmax {
  std::size_t classes = 0;
  std::size_t inputs = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  LinearSoftmax() = default;
  LinearSoftmax(std::size_t num_classes, std::size_t num_inputs)
      : classes(num_classes), inputs(num_inputs), weight(num_classes * num_inputs, 0.0),
        bias(num_classes, 0.0) {}

  std::vector<double> logits(std::span<const double> x) const;
  std::vector<double> probabilities(std::span<const double> x) const;

  // Cross entropy -log p[target]. When `grad` is set, adds scale * dL/dW and
  // scale * dL/db into it; when `dx` is set, adds scale * dL/dx into it.
  double loss(std::span<const double> x, std::size_t target, double scale = 1.0,
              LinearSoftmax* grad = nullptr, std::span<double> dx = {}) const;

  void axpy(double alpha, const LinearSoftmax& other);  // this += alpha * other
  void zero();

  friend bool operator==(const LinearSoftmax&, const LinearSoftmax&) = default;
};

// Index of the largest entry; lowest index wins exact ties.
std::size_t argmax(std::span<const double> values);

}  // namespace metafill
