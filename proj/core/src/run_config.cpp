#include "mshedge/run_config.hpp"

#include <algorithm>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mshedge/errors.hpp"
#include "mshedge/text_io.hpp"

namespace mshedge {

namespace {

namespace pt = boost::property_tree;

class SectionReader {
 public:
  SectionReader(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) section_ = &*child;
  }

  std::string text(const std::string& key) {
    seen_.push_back(key);
    if (!section_) return {};
    auto v = section_->get_optional<std::string>(key);
    return v ? std::string(trim(*v)) : std::string();
  }

  void number(const std::string& key, double& out) {
    auto t = text(key);
    if (!t.empty()) out = wrap([&] { return parse_double(t); }, key);
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    auto t = text(key);
    if (t.empty()) return;
    const long long v = wrap([&] { return parse_int(t); }, key);
    if constexpr (std::is_unsigned_v<Int>) {
      if (v < 0) throw ConfigError(where(key) + " must be >= 0");
    }
    out = static_cast<Int>(v);
  }

  void boolean(const std::string& key, bool& out) {
    auto t = text(key);
    if (t.empty()) return;
    if (t == "true" || t == "1" || t == "yes") {
      out = true;
    } else if (t == "false" || t == "0" || t == "no") {
      out = false;
    } else {
      throw ConfigError(where(key) + ": expected true/false, got '" + t + "'");
    }
  }

  void interval(const std::string& key, Interval& out) {
    auto t = text(key);
    if (t.empty()) return;
    auto parts = split(t);
    if (parts.size() != 2) throw ConfigError(where(key) + ": expected 'lo, hi'");
    out.lo = wrap([&] { return parse_double(parts[0]); }, key);
    out.hi = wrap([&] { return parse_double(parts[1]); }, key);
  }

  template <typename T>
  void list(const std::string& key, std::vector<T>& out) {
    auto t = text(key);
    if (t.empty()) return;
    out.clear();
    for (auto part : split(t)) {
      if constexpr (std::is_integral_v<T>) {
        out.push_back(static_cast<T>(wrap([&] { return parse_int(part); }, key)));
      } else {
        out.push_back(wrap([&] { return parse_double(part); }, key));
      }
    }
  }

  /// Rejects keys that no reader asked for.
  void check_unknown() const {
    if (!section_) return;
    for (const auto& [key, value] : *section_) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw ConfigError("unknown key '" + key + "' in section [" + name_ + "]");
      }
    }
  }

 private:
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  template <typename Fn>
  std::invoke_result_t<Fn> wrap(Fn fn, const std::string& key) {
    try {
      return fn();
    } catch (const InputError& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  std::string name_;
  const pt::ptree* section_ = nullptr;
  std::vector<std::string> seen_;
};

std::string interval_text(const Interval& iv) { return format_double(iv.lo) + "," + format_double(iv.hi); }

template <typename T>
std::string list_text(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_integral_v<T>) {
      out += std::to_string(xs[i]);
    } else {
      out += format_double(xs[i]);
    }
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  ranges.validate();
  HedgeConfig h = hedge;
  h.tau = 1;
  h.validate();
  if (!(moneyness > 0.0)) throw ConfigError("[hedge] moneyness must be > 0");
  if (n_paths < 1) throw ConfigError("[simulate] n_paths must be >= 1");
  if (substeps < 1) throw ConfigError("[simulate] substeps must be >= 1");
  if (cutoffs.empty()) throw ConfigError("[dataset] cutoffs must not be empty");
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (cutoffs[i] < 1 || cutoffs[i] > static_cast<int>(FeatureTensor::kDays)) {
      throw ConfigError("[dataset] cutoffs must lie in [1, 30]");
    }
    if (i > 0 && cutoffs[i] <= cutoffs[i - 1]) throw ConfigError("[dataset] cutoffs must be strictly increasing");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("[dataset] test_fraction must lie in (0, 1)");
  train.validate();
  if (baseline.forest.n_trees < 1) throw ConfigError("[train] forest_trees must be >= 1");
  if (!(baseline.logistic.learning_rate > 0.0)) throw ConfigError("[train] logistic_learning_rate must be > 0");
  if (sweep_gammas.empty()) throw ConfigError("[sweep] gammas must not be empty");
  for (double g : sweep_gammas) {
    if (!(g > 0.0)) throw ConfigError("[sweep] gammas must be > 0");
  }
  if (!real.csv.empty()) {
    real.params.validate();
    if (real.variance_window < 2) throw ConfigError("[real] variance_window must be >= 2");
    if (real.strike < 0.0) throw ConfigError("[real] strike must be >= 0");
  }
}

DatasetConfig RunConfig::dataset_config() const {
  DatasetConfig d;
  d.n_paths = n_paths;
  d.ranges = ranges;
  d.hedge = hedge;
  d.cutoffs = cutoffs;
  d.master_seed = seed;
  d.substeps = substeps;
  d.moneyness = moneyness;
  d.maturity_day = PeriodGrid::kHorizon;
  return d;
}

std::string RunConfig::canonical() const {
  std::ostringstream o;
  o << "[ranges]\n"
    << "mu=" << interval_text(ranges.mu) << "\na=" << interval_text(ranges.a) << "\nv_bar=" << interval_text(ranges.v_bar)
    << "\neta=" << interval_text(ranges.eta) << "\nrho=" << interval_text(ranges.rho)
    << "\ns0=" << interval_text(ranges.s0) << "\nv0=" << interval_text(ranges.v0) << "\n";
  o << "[hedge]\nf=" << format_double(hedge.f) << "\ngamma=" << format_double(hedge.gamma)
    << "\nr=" << format_double(hedge.r) << "\ncost_price_timing="
    << (hedge.cost_price_timing == CostPriceTiming::kPrevious ? "previous" : "current")
    << "\nmoneyness=" << format_double(moneyness) << "\n";
  o << "[simulate]\nn_paths=" << n_paths << "\nsubsteps=" << substeps << "\nseed=" << seed << "\n";
  o << "[dataset]\ncutoffs=" << list_text(cutoffs) << "\ntest_fraction=" << format_double(test_fraction) << "\n";
  o << "[train]\nlearning_rate=" << format_double(train.learning_rate) << "\nbatch_size=" << train.batch_size
    << "\nepochs=" << train.epochs << "\nbeta1=" << format_double(train.beta1) << "\nbeta2=" << format_double(train.beta2)
    << "\nepsilon=" << format_double(train.epsilon) << "\nseed=" << train.init_seed
    << "\nensemble_size=" << train.ensemble_size
    << "\nlogistic_learning_rate=" << format_double(baseline.logistic.learning_rate)
    << "\nlogistic_epochs=" << baseline.logistic.epochs << "\nlogistic_l2=" << format_double(baseline.logistic.l2)
    << "\nforest_trees=" << baseline.forest.n_trees << "\nforest_max_depth=" << baseline.forest.max_depth
    << "\nforest_min_samples_leaf=" << baseline.forest.min_samples_leaf
    << "\nforest_features_per_split=" << baseline.forest.features_per_split
    << "\nforest_bootstrap=" << (baseline.forest.bootstrap ? "true" : "false")
    << "\nforest_seed=" << baseline.forest.seed << "\n";
  o << "[backtest]\npath_id=" << backtest_path_id << "\n";
  o << "[real]\ncsv=" << real.csv.generic_string() << "\ntruncate=" << (real.truncate ? "true" : "false")
    << "\nforce=" << (real.force ? "true" : "false") << "\nstrike=" << format_double(real.strike)
    << "\na=" << format_double(real.params.a) << "\nv_bar=" << format_double(real.params.v_bar)
    << "\neta=" << format_double(real.params.eta) << "\nrho=" << format_double(real.params.rho)
    << "\nv0=" << format_double(real.params.v0) << "\nvariance_window=" << real.variance_window << "\n";
  o << "[sweep]\ngammas=" << list_text(sweep_gammas) << "\nn_paths=" << sweep_paths << "\n";
  return o.str();
}

std::string RunConfig::hash() const {
  std::string material = canonical();
  if (!real.csv.empty()) material += read_file(real.csv);
  return hex64(fnv1a64(material));
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  static const std::vector<std::string> kSections{"ranges", "hedge", "simulate", "dataset", "train",
                                                  "backtest", "real", "sweep"};
  for (const auto& [name, child] : root) {
    if (std::find(kSections.begin(), kSections.end(), name) == kSections.end()) {
      throw ConfigError("config: unknown section [" + name + "]");
    }
    if (child.empty() && !child.data().empty()) throw ConfigError("config: key '" + name + "' outside a section");
  }

  RunConfig cfg;
  SectionReader ranges(root, "ranges");
  ranges.interval("mu", cfg.ranges.mu);
  ranges.interval("a", cfg.ranges.a);
  ranges.interval("v_bar", cfg.ranges.v_bar);
  ranges.interval("eta", cfg.ranges.eta);
  ranges.interval("rho", cfg.ranges.rho);
  ranges.interval("s0", cfg.ranges.s0);
  ranges.interval("v0", cfg.ranges.v0);
  ranges.check_unknown();

  SectionReader hedge(root, "hedge");
  hedge.number("f", cfg.hedge.f);
  hedge.number("gamma", cfg.hedge.gamma);
  hedge.number("r", cfg.hedge.r);
  if (auto timing = hedge.text("cost_price_timing"); !timing.empty()) {
    if (timing == "previous") {
      cfg.hedge.cost_price_timing = CostPriceTiming::kPrevious;
    } else if (timing == "current") {
      cfg.hedge.cost_price_timing = CostPriceTiming::kCurrent;
    } else {
      throw ConfigError("[hedge] cost_price_timing must be 'previous' or 'current'");
    }
  }
  hedge.number("moneyness", cfg.moneyness);
  hedge.check_unknown();

  SectionReader sim(root, "simulate");
  sim.integer("n_paths", cfg.n_paths);
  sim.integer("substeps", cfg.substeps);
  sim.integer("seed", cfg.seed);
  sim.check_unknown();

  SectionReader ds(root, "dataset");
  ds.list("cutoffs", cfg.cutoffs);
  ds.number("test_fraction", cfg.test_fraction);
  ds.check_unknown();

  SectionReader tr(root, "train");
  tr.number("learning_rate", cfg.train.learning_rate);
  tr.integer("batch_size", cfg.train.batch_size);
  tr.integer("epochs", cfg.train.epochs);
  tr.number("beta1", cfg.train.beta1);
  tr.number("beta2", cfg.train.beta2);
  tr.number("epsilon", cfg.train.epsilon);
  tr.integer("seed", cfg.train.init_seed);
  tr.integer("ensemble_size", cfg.train.ensemble_size);
  tr.number("logistic_learning_rate", cfg.baseline.logistic.learning_rate);
  tr.integer("logistic_epochs", cfg.baseline.logistic.epochs);
  tr.number("logistic_l2", cfg.baseline.logistic.l2);
  tr.integer("forest_trees", cfg.baseline.forest.n_trees);
  tr.integer("forest_max_depth", cfg.baseline.forest.max_depth);
  tr.integer("forest_min_samples_leaf", cfg.baseline.forest.min_samples_leaf);
  tr.integer("forest_features_per_split", cfg.baseline.forest.features_per_split);
  tr.boolean("forest_bootstrap", cfg.baseline.forest.bootstrap);
  tr.integer("forest_seed", cfg.baseline.forest.seed);
  tr.check_unknown();

  SectionReader bt(root, "backtest");
  bt.integer("path_id", cfg.backtest_path_id);
  bt.check_unknown();

  SectionReader real(root, "real");
  if (auto csv = real.text("csv"); !csv.empty()) {
    std::filesystem::path p(csv);
    cfg.real.csv = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  real.boolean("truncate", cfg.real.truncate);
  real.boolean("force", cfg.real.force);
  real.number("strike", cfg.real.strike);
  real.number("a", cfg.real.params.a);
  real.number("v_bar", cfg.real.params.v_bar);
  real.number("eta", cfg.real.params.eta);
  real.number("rho", cfg.real.params.rho);
  real.number("v0", cfg.real.params.v0);
  real.integer("variance_window", cfg.real.variance_window);
  real.check_unknown();

  SectionReader sw(root, "sweep");
  sw.list("gammas", cfg.sweep_gammas);
  sw.integer("n_paths", cfg.sweep_paths);
  sw.check_unknown();

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DependencyError&) {
    throw ConfigError("config file not found: " + path.string());
  }
  return parse_run_config(text, path.parent_path());
}

}  // namespace mshedge
