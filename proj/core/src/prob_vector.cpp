#include "mshedge/prob_vector.hpp"

#include <cmath>

#include "mshedge/errors.hpp"

namespace mshedge {

ProbVector uniform_probs() {
  ProbVector p;
  p.fill(1.0 / static_cast<double>(PeriodGrid::kSize));
  return p;
}

ProbVector one_hot(std::size_t index) {
  if (index >= PeriodGrid::kSize) throw InputError("one_hot: index out of range");
  ProbVector p{};
  p[index] = 1.0;
  return p;
}

bool is_valid(const ProbVector& p, double tol) {
  double sum = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

ProbVector mean_probs(std::span<const ProbVector> members) {
  if (members.empty()) throw InputError("mean_probs: empty ensemble");
  ProbVector out{};
  for (const auto& m : members) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += m[k];
  }
  for (double& x : out) x /= static_cast<double>(members.size());
  return out;
}

ProbVector multinomial_mle(std::span<const std::size_t> labels) {
  if (labels.empty()) throw InputError("multinomial_mle: no labels");
  ProbVector p{};
  for (auto l : labels) {
    if (l >= PeriodGrid::kSize) throw InputError("multinomial_mle: label out of range");
    p[l] += 1.0;
  }
  for (double& x : p) x /= static_cast<double>(labels.size());
  return p;
}

}  // namespace mshedge
