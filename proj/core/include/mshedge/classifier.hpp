#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mshedge/cnn.hpp"
#include "mshedge/forest.hpp"
#include "mshedge/logistic.hpp"
#include "mshedge/prob_vector.hpp"

namespace mshedge {

/// Input-independent model: always returns the same distribution (used for
/// the histogram "bayes" baseline and the uniform baseline).
struct ConstantModel {
  ProbVector probs = uniform_probs();
};

using AnyModel = std::variant<CnnModel, LogisticModel, ForestModel, ConstantModel>;

ProbVector predict(const AnyModel& model, const FeatureTensor& x);

enum class ModelKind { kCnn, kForest, kLinear, kBayes, kUniform };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct BaselineHyper {
  LogisticConfig logistic;
  ForestConfig forest;
};

/// Trains one non-CNN model: logistic ("linear"), forest, the multinomial
/// histogram ("bayes") or the uniform distribution.
AnyModel train_baseline(ModelKind kind, std::span<const Sample> train, const BaselineHyper& hyper);
ProbVector predict_baseline(const AnyModel& model, const FeatureTensor& x);

/// Trained models grouped by the cutoff day they were fitted on. The output
/// for a cutoff is the arithmetic mean of its members.
struct EnsembleSpec {
  ModelKind kind = ModelKind::kCnn;
  std::map<int, std::vector<AnyModel>> by_cutoff;

  bool empty() const;
  ProbVector predict(int cutoff, const FeatureTensor& x) const;
};

/// Writes manifest.json plus one parameter CSV per member into `dir`.
/// `extra_json` (an object) is merged into the manifest.
void save_ensemble(const EnsembleSpec& ensemble, const std::filesystem::path& dir, const std::string& extra_json = "{}",
                   const std::string& header_comment = {});
/// Throws DependencyError when the manifest or a member file is missing.
EnsembleSpec load_ensemble(const std::filesystem::path& dir);

}  // namespace mshedge
