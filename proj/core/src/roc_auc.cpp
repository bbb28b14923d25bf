#include "mshedge/roc_auc.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

#include "mshedge/errors.hpp"

namespace mshedge {

double roc_auc_binary(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw InputError("roc_auc: score/label length mismatch");
  // Mann-Whitney: sum of positive mid-ranks, which equals the concordant
  // pair count with ties at one half.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double n_pos = 0.0, n_neg = 0.0, rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        rank_sum += mid_rank;
        n_pos += 1.0;
      } else {
        n_neg += 1.0;
      }
    }
    i = j;
  }
  if (n_pos == 0.0 || n_neg == 0.0) throw InputError("roc_auc: AUC undefined with a single class");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

OvrAuc roc_auc_ovr(std::span<const ProbVector> scores, std::span<const std::size_t> labels) {
  if (scores.size() != labels.size()) throw InputError("roc_auc_ovr: score/label length mismatch");
  std::array<std::size_t, PeriodGrid::kSize> counts{};
  for (auto l : labels) {
    if (l >= PeriodGrid::kSize) throw InputError("roc_auc_ovr: label out of range");
    ++counts[l];
  }
  const auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  if (present < 2) throw InputError("roc_auc_ovr: AUC undefined with a single class");

  OvrAuc out;
  std::vector<double> column(scores.size());
  auto is_pos = std::make_unique<bool[]>(scores.size());
  double sum = 0.0;
  int defined = 0;
  for (std::size_t k = 0; k < PeriodGrid::kSize; ++k) {
    if (counts[k] == 0 || counts[k] == labels.size()) continue;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      column[i] = scores[i][k];
      is_pos[i] = labels[i] == k;
    }
    out.per_class[k] = roc_auc_binary(column, std::span<const bool>(is_pos.get(), scores.size()));
    sum += *out.per_class[k];
    ++defined;
  }
  out.macro = sum / defined;
  return out;
}

}  // namespace mshedge
