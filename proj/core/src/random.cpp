#include "metafill/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace metafill {

std::size_t sample_softmax(std::span<const double> scores, double temperature, Rng& rng) {
  if (scores.empty()) throw std::invalid_argument("sample_softmax: empty score list");
  auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
  if (temperature <= 1e-9) return best;
  const double top = scores[best];
  std::vector<double> weights(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::exp((scores[i] - top) / temperature);
    total += weights[i];
  }
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return best;
}

}  // namespace metafill
