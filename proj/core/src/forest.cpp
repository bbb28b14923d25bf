#include "mshedge/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mshedge/errors.hpp"
#include "mshedge/random.hpp"

namespace mshedge {

namespace {

constexpr std::size_t kClasses = PeriodGrid::kSize;
constexpr std::size_t kFeatures = FeatureTensor::kSize;
constexpr double kSmoothing = 1e-6;

using Counts = std::array<double, kClasses>;

double gini(const Counts& counts, double n) {
  if (n <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (double c : counts) sum_sq += (c / n) * (c / n);
  return 1.0 - sum_sq;
}

ProbVector leaf_probs(const Counts& counts, double n) {
  ProbVector p;
  const double denom = n + kSmoothing * static_cast<double>(kClasses);
  for (std::size_t k = 0; k < kClasses; ++k) p[k] = (counts[k] + kSmoothing) / denom;
  return p;
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const Sample> data, const ForestConfig& cfg, Rng& rng)
      : data_(data), cfg_(cfg), rng_(rng) {
    mtry_ = cfg.features_per_split == 0 ? static_cast<std::size_t>(std::sqrt(static_cast<double>(kFeatures)))
                                        : std::min(cfg.features_per_split, kFeatures);
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  int grow(std::vector<std::size_t> rows, std::size_t depth) {
    Counts counts{};
    for (auto r : rows) counts[data_[r].label_index] += 1.0;
    const double n = static_cast<double>(rows.size());
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    tree_.nodes[static_cast<std::size_t>(index)].probs = leaf_probs(counts, n);

    const double parent = gini(counts, n);
    if (depth >= cfg_.max_depth || rows.size() < 2 * std::max<std::size_t>(cfg_.min_samples_leaf, 1) ||
        parent == 0.0) {
      return index;
    }
    Split best = find_split(rows);
    if (!best.found || best.impurity >= parent - 1e-12) return index;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (data_[r].features.values[best.feature] <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int rr = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = l;
    node.right = rr;
    return index;
  }

  Split find_split(const std::vector<std::size_t>& rows) {
    std::array<std::size_t, kFeatures> candidates;
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    for (std::size_t i = 0; i < mtry_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, kFeatures - 1);
      std::swap(candidates[i], candidates[pick(rng_)]);
    }
    const std::size_t min_leaf = std::max<std::size_t>(cfg_.min_samples_leaf, 1);
    const double n = static_cast<double>(rows.size());
    Counts total{};
    for (auto r : rows) total[data_[r].label_index] += 1.0;

    Split best;
    std::vector<std::pair<double, std::size_t>> sorted(rows.size());
    for (std::size_t c = 0; c < mtry_; ++c) {
      const std::size_t f = candidates[c];
      for (std::size_t i = 0; i < rows.size(); ++i) {
        sorted[i] = {data_[rows[i]].features.values[f], data_[rows[i]].label_index};
      }
      std::sort(sorted.begin(), sorted.end());
      Counts left{};
      for (std::size_t i = 1; i < sorted.size(); ++i) {
        left[sorted[i - 1].second] += 1.0;
        if (sorted[i - 1].first == sorted[i].first) continue;
        if (i < min_leaf || sorted.size() - i < min_leaf) continue;
        Counts right;
        for (std::size_t k = 0; k < kClasses; ++k) right[k] = total[k] - left[k];
        const double nl = static_cast<double>(i);
        const double nr = n - nl;
        const double impurity = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        if (!best.found || impurity < best.impurity) {
          best = Split{true, f, 0.5 * (sorted[i - 1].first + sorted[i].first), impurity};
        }
      }
    }
    return best;
  }

  std::span<const Sample> data_;
  const ForestConfig& cfg_;
  Rng& rng_;
  std::size_t mtry_ = 0;
  DecisionTree tree_;
};

}  // namespace

ForestModel train_forest(std::span<const Sample> train, const ForestConfig& cfg) {
  if (train.empty()) throw InputError("train_forest: empty training split");
  if (cfg.n_trees == 0) throw ConfigError("forest: n_trees must be >= 1");
  ForestModel model;
  model.trees.reserve(cfg.n_trees);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    Rng rng = make_rng(cfg.seed, StreamKind::kBootstrap, t);
    std::vector<std::size_t> rows(train.size());
    if (cfg.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    TreeBuilder builder(train, cfg, rng);
    model.trees.push_back(builder.build(std::move(rows)));
  }
  return model;
}

ProbVector predict_tree(const DecisionTree& tree, const FeatureTensor& x) {
  if (tree.nodes.empty()) throw InputError("predict_tree: empty tree");
  std::size_t i = 0;
  while (tree.nodes[i].feature >= 0) {
    const auto& node = tree.nodes[i];
    i = static_cast<std::size_t>(x.values[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                    : node.right);
  }
  return tree.nodes[i].probs;
}

ProbVector predict_forest(const ForestModel& model, const FeatureTensor& x) {
  if (model.trees.empty()) throw InputError("predict_forest: empty forest");
  ProbVector out{};
  for (const auto& t : model.trees) {
    const ProbVector p = predict_tree(t, x);
    for (std::size_t k = 0; k < kClasses; ++k) out[k] += p[k];
  }
  for (double& x_k : out) x_k /= static_cast<double>(model.trees.size());
  return out;
}

}  // namespace mshedge
