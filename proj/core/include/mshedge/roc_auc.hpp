#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mshedge/prob_vector.hpp"

namespace mshedge {

/// Binary AUC: the fraction of (positive, negative) pairs the scores order
/// correctly, ties counting one half. Throws InputError when either class
/// is empty.
double roc_auc_binary(std::span<const double> scores, std::span<const bool> positive);

struct OvrAuc {
  /// Empty for classes absent from the labels (or present in every row).
  std::array<std::optional<double>, PeriodGrid::kSize> per_class;
  double macro = 0.0;  // mean over the defined per-class values
};

/// One-vs-rest AUC of each class column of `scores` (n rows of 8).
/// Throws InputError if fewer than two classes occur in `labels`.
OvrAuc roc_auc_ovr(std::span<const ProbVector> scores, std::span<const std::size_t> labels);

}  // namespace mshedge
