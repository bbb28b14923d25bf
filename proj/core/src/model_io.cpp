#include "mshedge/classifier.hpp"

#include "json_io.hpp"
#include "mshedge/errors.hpp"
#include "mshedge/text_io.hpp"

namespace mshedge {

ProbVector predict(const AnyModel& model, const FeatureTensor& x) {
  struct Visitor {
    const FeatureTensor& x;
    ProbVector operator()(const CnnModel& m) const { return cnn_forward(m, x); }
    ProbVector operator()(const LogisticModel& m) const { return predict_logistic(m, x); }
    ProbVector operator()(const ForestModel& m) const { return predict_forest(m, x); }
    ProbVector operator()(const ConstantModel& m) const { return m.probs; }
  };
  return std::visit(Visitor{x}, model);
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kCnn: return "cnn";
    case ModelKind::kForest: return "forest";
    case ModelKind::kLinear: return "linear";
    case ModelKind::kBayes: return "bayes";
    case ModelKind::kUniform: return "unif";
  }
  return "?";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (auto k : {ModelKind::kCnn, ModelKind::kForest, ModelKind::kLinear, ModelKind::kBayes, ModelKind::kUniform}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

AnyModel train_baseline(ModelKind kind, std::span<const Sample> train, const BaselineHyper& hyper) {
  switch (kind) {
    case ModelKind::kLinear: return train_logistic(train, hyper.logistic);
    case ModelKind::kForest: return train_forest(train, hyper.forest);
    case ModelKind::kBayes: {
      std::vector<std::size_t> labels;
      labels.reserve(train.size());
      for (const auto& s : train) labels.push_back(s.label_index);
      return ConstantModel{multinomial_mle(labels)};
    }
    case ModelKind::kUniform: return ConstantModel{uniform_probs()};
    case ModelKind::kCnn: break;
  }
  throw ConfigError("train_baseline: the CNN is trained with cnn_train");
}

ProbVector predict_baseline(const AnyModel& model, const FeatureTensor& x) { return predict(model, x); }

bool EnsembleSpec::empty() const {
  for (const auto& [cutoff, members] : by_cutoff) {
    if (!members.empty()) return false;
  }
  return true;
}

ProbVector EnsembleSpec::predict(int cutoff, const FeatureTensor& x) const {
  auto it = by_cutoff.find(cutoff);
  if (it == by_cutoff.end() || it->second.empty()) {
    throw ConfigError("ensemble has no models for cutoff " + std::to_string(cutoff));
  }
  std::vector<ProbVector> outs;
  outs.reserve(it->second.size());
  for (const auto& m : it->second) outs.push_back(mshedge::predict(m, x));
  return mean_probs(outs);
}

namespace {

std::string vector_csv(const std::vector<double>& xs, const std::string& prefix) {
  std::string out = prefix + "value\n";
  for (double x : xs) out += format_double(x) + '\n';
  return out;
}

std::vector<double> read_vector_csv(const std::filesystem::path& path) {
  CsvTable t = read_csv(path);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    try {
      out.push_back(parse_double(t.rows[i].at(0)));
    } catch (const InputError& e) {
      throw ParseError(path.string(), t.row_lines[i], e.what());
    }
  }
  return out;
}

std::string forest_csv(const ForestModel& f, const std::string& prefix) {
  std::string out = prefix + "tree,node,feature,threshold,left,right";
  for (int tau : PeriodGrid::kTaus) out += ",p_" + std::to_string(tau);
  out += '\n';
  for (std::size_t t = 0; t < f.trees.size(); ++t) {
    for (std::size_t n = 0; n < f.trees[t].nodes.size(); ++n) {
      const auto& node = f.trees[t].nodes[n];
      out += std::to_string(t) + ',' + std::to_string(n) + ',' + std::to_string(node.feature) + ',' +
             format_double(node.threshold) + ',' + std::to_string(node.left) + ',' + std::to_string(node.right);
      for (double p : node.probs) out += ',' + format_double(p);
      out += '\n';
    }
  }
  return out;
}

ForestModel read_forest_csv(const std::filesystem::path& path) {
  CsvTable t = read_csv(path);
  ForestModel f;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    try {
      const auto tree = static_cast<std::size_t>(parse_int(row.at(0)));
      const auto node = static_cast<std::size_t>(parse_int(row.at(1)));
      if (tree >= f.trees.size()) f.trees.resize(tree + 1);
      auto& nodes = f.trees[tree].nodes;
      if (node != nodes.size()) throw InputError("nodes must be listed in order");
      TreeNode n;
      n.feature = static_cast<int>(parse_int(row.at(2)));
      n.threshold = parse_double(row.at(3));
      n.left = static_cast<int>(parse_int(row.at(4)));
      n.right = static_cast<int>(parse_int(row.at(5)));
      for (std::size_t k = 0; k < PeriodGrid::kSize; ++k) n.probs[k] = parse_double(row.at(6 + k));
      nodes.push_back(n);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path.string(), t.row_lines[i], e.what());
    }
  }
  return f;
}

}  // namespace

void save_ensemble(const EnsembleSpec& ensemble, const std::filesystem::path& dir, const std::string& extra_json,
                   const std::string& header_comment) {
  const std::string prefix = header_comment.empty() ? std::string() : "# " + header_comment + "\n";
  Json manifest = Json::parse(extra_json);
  manifest["kind"] = std::string(to_string(ensemble.kind));
  if (ensemble.kind == ModelKind::kCnn) {
    manifest["architecture"] =
        "conv(2->4,k5,same) relu pool2 | conv(4->8,k5,same) relu pool2 | conv(8->8,k3,same) relu | "
        "dense(56->24) relu | dense(24->16) relu | dense(16->8) softmax";
    manifest["param_count"] = CnnModel::param_count();
  }
  Json cutoffs = Json::object();
  for (const auto& [cutoff, members] : ensemble.by_cutoff) {
    Json list = Json::array();
    for (std::size_t m = 0; m < members.size(); ++m) {
      const std::string stem = "cutoff_" + std::to_string(cutoff) + "_member_" + std::to_string(m);
      Json entry;
      const auto& model = members[m];
      if (const auto* cnn = std::get_if<CnnModel>(&model)) {
        entry["type"] = "cnn";
        entry["file"] = stem + ".csv";
        write_file(dir / (stem + ".csv"), vector_csv(cnn->params, prefix));
      } else if (const auto* lr = std::get_if<LogisticModel>(&model)) {
        entry["type"] = "logistic";
        entry["file"] = stem + ".csv";
        write_file(dir / (stem + ".csv"), vector_csv(lr->weights, prefix));
      } else if (const auto* forest = std::get_if<ForestModel>(&model)) {
        entry["type"] = "forest";
        entry["file"] = stem + ".csv";
        write_file(dir / (stem + ".csv"), forest_csv(*forest, prefix));
      } else {
        entry["type"] = "constant";
        entry["probs"] = std::get<ConstantModel>(model).probs;
      }
      list.push_back(entry);
    }
    cutoffs[std::to_string(cutoff)] = list;
  }
  manifest["cutoffs"] = cutoffs;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

EnsembleSpec load_ensemble(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  Json manifest;
  try {
    manifest = Json::parse(read_file(manifest_path));
  } catch (const Json::exception& e) {
    throw InputError(manifest_path.string() + ": " + e.what());
  }
  EnsembleSpec ens;
  ens.kind = model_kind_from_string(manifest.at("kind").get<std::string>());
  for (const auto& [key, list] : manifest.at("cutoffs").items()) {
    const int cutoff = static_cast<int>(parse_int(key));
    auto& members = ens.by_cutoff[cutoff];
    for (const auto& entry : list) {
      const auto type = entry.at("type").get<std::string>();
      if (type == "cnn") {
        CnnModel m;
        m.params = read_vector_csv(dir / entry.at("file").get<std::string>());
        members.emplace_back(std::move(m));
      } else if (type == "logistic") {
        LogisticModel m;
        m.weights = read_vector_csv(dir / entry.at("file").get<std::string>());
        members.emplace_back(std::move(m));
      } else if (type == "forest") {
        members.emplace_back(read_forest_csv(dir / entry.at("file").get<std::string>()));
      } else if (type == "constant") {
        ConstantModel m;
        m.probs = entry.at("probs").get<ProbVector>();
        members.emplace_back(m);
      } else {
        throw InputError(manifest_path.string() + ": unknown member type '" + type + "'");
      }
    }
  }
  return ens;
}

}  // namespace mshedge
