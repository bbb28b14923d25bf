#include "mshedge/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "mshedge/errors.hpp"

namespace mshedge {

namespace {

constexpr std::size_t kClasses = PeriodGrid::kSize;
constexpr std::size_t kIn = LogisticModel::kInputs;
constexpr std::size_t kBias = kClasses * kIn;

ProbVector softmax_scores(const std::vector<double>& w, const FeatureTensor& x) {
  ProbVector logits;
  for (std::size_t k = 0; k < kClasses; ++k) {
    double acc = w[kBias + k];
    for (std::size_t i = 0; i < kIn; ++i) acc += w[k * kIn + i] * x.values[i];
    logits[k] = acc;
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  for (double& l : logits) l = std::exp(l - peak);
  // sum in sorted order so relabeling classes cannot change rounding
  ProbVector sorted = logits;
  std::sort(sorted.begin(), sorted.end());
  double z = 0.0;
  for (double e : sorted) z += e;
  for (double& l : logits) l /= z;
  return logits;
}

}  // namespace

LogisticModel LogisticModel::zeros() {
  LogisticModel m;
  m.weights.assign(kClasses * kIn + kClasses, 0.0);
  return m;
}

LogisticModel train_logistic(std::span<const Sample> train, const LogisticConfig& cfg) {
  if (train.empty()) throw InputError("train_logistic: empty training split");
  if (!(cfg.learning_rate > 0.0) || !(cfg.l2 >= 0.0)) throw ConfigError("logistic: bad hyperparameters");
  LogisticModel model = LogisticModel::zeros();
  std::vector<double> grad(model.weights.size());
  const double inv_n = 1.0 / static_cast<double>(train.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& s : train) {
      const ProbVector p = softmax_scores(model.weights, s.features);
      for (std::size_t k = 0; k < kClasses; ++k) {
        const double d = (p[k] - (k == s.label_index ? 1.0 : 0.0)) * inv_n;
        grad[kBias + k] += d;
        for (std::size_t i = 0; i < kIn; ++i) grad[k * kIn + i] += d * s.features.values[i];
      }
    }
    for (std::size_t j = 0; j < kBias; ++j) grad[j] += cfg.l2 * model.weights[j];
    for (std::size_t j = 0; j < grad.size(); ++j) model.weights[j] -= cfg.learning_rate * grad[j];
  }
  for (double w : model.weights) {
    if (!std::isfinite(w)) throw NumericalError("train_logistic: weights diverged");
  }
  return model;
}

ProbVector predict_logistic(const LogisticModel& model, const FeatureTensor& x) {
  if (model.weights.size() != kClasses * kIn + kClasses) throw InputError("logistic: wrong weight count");
  return softmax_scores(model.weights, x);
}

}  // namespace mshedge
