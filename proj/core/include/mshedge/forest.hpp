#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mshedge/dataset.hpp"
#include "mshedge/prob_vector.hpp"

namespace mshedge {

struct ForestConfig {
  std::size_t n_trees = 50;
  std::size_t max_depth = 6;
  std::size_t min_samples_leaf = 5;
  std::size_t features_per_split = 0;  // 0 = floor(sqrt(60))
  bool bootstrap = true;
  std::uint64_t seed = 7;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;     // x[feature] <= threshold
  int right = -1;
  ProbVector probs{};
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

/// Bagged depth-limited Gini trees over the 60 flattened feature values.
struct ForestModel {
  std::vector<DecisionTree> trees;
};

/// Leaf probabilities are smoothed class frequencies (n_k + 1e-6) / (n + 8e-6).
ForestModel train_forest(std::span<const Sample> train, const ForestConfig& cfg);
ProbVector predict_tree(const DecisionTree& tree, const FeatureTensor& x);
/// Mean of the tree outputs.
ProbVector predict_forest(const ForestModel& model, const FeatureTensor& x);

}  // namespace mshedge
