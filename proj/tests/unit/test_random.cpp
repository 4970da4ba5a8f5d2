#include <doctest.h>

#include <set>
#include <vector>

#include "metafill/random.hpp"

using namespace metafill;

TEST_CASE("derived seeds are distinct and reproducible") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 50; ++s)
    for (std::uint64_t k = 0; k < 50; ++k) seen.insert(derive_seed(s, k));
  CHECK(seen.size() == 2500);
  static_assert(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

TEST_CASE("zero temperature picks the lowest index among ties") {
  Rng rng(1);
  const std::vector<double> scores{0.1, 3.0, 3.0, -1.0};
  for (int i = 0; i < 20; ++i) CHECK(sample_softmax(scores, 0.0, rng) == 1);
}

TEST_CASE("softmax sampling follows the distribution") {
  Rng rng(9);
  const std::vector<double> scores{0.0, std::log(3.0)};
  int ones = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) ones += sample_softmax(scores, 1.0, rng) == 1;
  // Expected 0.75; 4 sigma is about 0.012.
  CHECK(std::abs(ones / double(n) - 0.75) < 0.012);
}

TEST_CASE("high temperature flattens the distribution") {
  Rng rng(4);
  const std::vector<double> scores{0.0, 5.0};
  int ones = 0;
  for (int i = 0; i < 10000; ++i) ones += sample_softmax(scores, 1e6, rng) == 1;
  CHECK(std::abs(ones / 10000.0 - 0.5) < 0.03);
}
