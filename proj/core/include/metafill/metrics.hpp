#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace metafill {

// labels: 1 = positive, 0 = negative. Both classes must be present.

// Probability that a random positive outranks a random negative, ties = 1/2.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Mean over positives of the precision at that positive's score threshold:
// precision counts every item scoring >= the positive, so tied items enter
// together.
double average_precision(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};
// One point per distinct score, descending threshold, starting at (0, 0).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
  std::vector<double> per_class;
};
// Single-label classification over classes 0..classes-1. A class absent from
// both truth and predictions counts F1 = 0 in the macro mean.
F1Scores f1_scores(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                   std::size_t classes);

// 1-based ranks, tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);
double pearson(std::span<const double> a, std::span<const double> b);
// Pearson correlation of average ranks. NaN when either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace metafill
