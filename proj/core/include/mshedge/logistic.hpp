#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mshedge/dataset.hpp"
#include "mshedge/prob_vector.hpp"

namespace mshedge {

struct LogisticConfig {
  double learning_rate = 0.5;
  std::size_t epochs = 500;
  double l2 = 1e-4;
};

/// Multinomial softmax regression on the 60 flattened feature values.
/// weights is row-major [class][feature], followed by one bias per class.
struct LogisticModel {
  static constexpr std::size_t kInputs = FeatureTensor::kSize;
  std::vector<double> weights;

  static LogisticModel zeros();
};

/// Full-batch gradient descent from zero weights. Classes are treated
/// symmetrically, so permuting the labels permutes the output.
LogisticModel train_logistic(std::span<const Sample> train, const LogisticConfig& cfg);
ProbVector predict_logistic(const LogisticModel& model, const FeatureTensor& x);

}  // namespace mshedge
