#include "mshedge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <optional>

#include "json_io.hpp"
#include "mshedge/errors.hpp"
#include "mshedge/market_csv.hpp"
#include "mshedge/multiscale.hpp"
#include "mshedge/parallel.hpp"
#include "mshedge/random.hpp"
#include "mshedge/roc_auc.hpp"
#include "mshedge/text_io.hpp"

namespace mshedge {

namespace fs = std::filesystem;

namespace {

constexpr std::array<Stage, 6> kStages{Stage::kSimulate, Stage::kLabel,    Stage::kTrain,
                                       Stage::kEvaluate, Stage::kBacktest, Stage::kSweep};
constexpr std::array<ModelKind, 5> kKinds{ModelKind::kCnn, ModelKind::kForest, ModelKind::kLinear, ModelKind::kBayes,
                                          ModelKind::kUniform};

std::string manifest_name(Stage stage) { return std::string(to_string(stage)) + ".json"; }

// Shared state of one stage run: where to write, what to stamp on files, and
// the list of files written so far.
struct StageContext {
  const RunConfig& config;
  const PipelineOptions& opts;
  Stage stage;
  std::string hash;
  std::vector<std::string> files;

  std::string comment() const { return "config_hash=" + hash + " stage=" + std::string(to_string(stage)); }

  void log(const std::string& msg) const {
    if (opts.verbose) std::cerr << "[" << to_string(stage) << "] " << msg << "\n";
  }

  void write(const std::string& rel, std::string_view content) {
    write_file(opts.out_dir / rel, content);
    files.push_back(rel);
  }

  // CSV with the stamped comment line in front.
  void write_csv(const std::string& rel, const std::string& body) { write(rel, "# " + comment() + "\n" + body); }

  void note_file(const std::string& rel) { files.push_back(rel); }

  void write_manifest(Json extra) {
    Json j;
    j["stage"] = std::string(to_string(stage));
    j["version"] = MSHEDGE_VERSION;
    j["config_hash"] = hash;
    j["seeds"] = Json{{"master", config.seed}, {"train_init", config.train.init_seed},
                      {"forest", config.baseline.forest.seed}};
    for (auto& [k, v] : extra.items()) j[k] = v;
    std::sort(files.begin(), files.end());
    j["files"] = files;
    write_file(opts.out_dir / manifest_name(stage), j.dump(2) + "\n");
  }
};

Json read_manifest(const fs::path& out_dir, Stage stage) {
  const fs::path path = out_dir / manifest_name(stage);
  if (!fs::exists(path)) {
    throw DependencyError("stage '" + std::string(to_string(stage)) + "' has not been run: missing " + path.string());
  }
  try {
    return Json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DependencyError("unreadable manifest " + path.string() + ": " + e.what());
  }
}

// Fails unless `dep` ran under the same configuration.
void require_stage(const StageContext& ctx, Stage dep) {
  const Json j = read_manifest(ctx.opts.out_dir, dep);
  const std::string theirs = j.value("config_hash", std::string());
  if (theirs != ctx.hash) {
    throw DependencyError("artifacts of stage '" + std::string(to_string(dep)) + "' in " + ctx.opts.out_dir.string() +
                          " were produced by config " + theirs + ", current config is " + ctx.hash);
  }
  for (const auto& f : j.at("files")) {
    const fs::path p = ctx.opts.out_dir / f.get<std::string>();
    if (!fs::exists(p)) throw DependencyError("missing artifact " + p.string() + " (rerun '" + std::string(to_string(dep)) + "')");
  }
}

// Rejects a CSV whose stamped hash differs from the current run's.
void check_stamp(const CsvTable& table, const fs::path& path, const std::string& hash) {
  const std::string want = "config_hash=" + hash;
  for (const auto& c : table.comments) {
    if (c.find(want) != std::string::npos) return;
  }
  throw DependencyError(path.string() + " does not carry config hash " + hash);
}

CsvTable read_stamped(const fs::path& path, const std::string& hash) {
  if (!fs::exists(path)) throw DependencyError("missing artifact " + path.string());
  CsvTable t = read_csv(path);
  check_stamp(t, path, hash);
  return t;
}

std::size_t n_train_paths(const RunConfig& cfg) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(cfg.n_paths) * (1.0 - cfg.test_fraction)));
}

std::string params_csv_header() { return "path_id,mu,a,v_bar,eta,rho,s0,v0\n"; }

std::string params_csv_row(std::size_t id, const HestonParams& p) {
  const std::array<double, 7> xs{p.mu, p.a, p.v_bar, p.eta, p.rho, p.s0, p.v0};
  return std::to_string(id) + "," + join_doubles(xs) + "\n";
}

// ---- loading earlier stages -------------------------------------------------

struct SimulatedPath {
  HestonParams params;
  std::vector<double> s;
  std::vector<double> v;
};

std::vector<SimulatedPath> load_simulated(const StageContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const std::size_t width = static_cast<std::size_t>(PeriodGrid::kHorizon) + 1;
  std::vector<SimulatedPath> out(cfg.n_paths);

  const fs::path params_path = ctx.opts.out_dir / "params.csv";
  const CsvTable pt = read_stamped(params_path, ctx.hash);
  if (pt.rows.size() != cfg.n_paths) throw DependencyError(params_path.string() + ": wrong number of paths");
  for (std::size_t i = 0; i < pt.rows.size(); ++i) {
    const auto& r = pt.rows[i];
    const auto id = static_cast<std::size_t>(parse_int(r[0]));
    if (id != i) throw ParseError(params_path.string(), pt.row_lines[i], "path ids out of order");
    HestonParams& p = out[i].params;
    p.mu = parse_double(r[1]);
    p.a = parse_double(r[2]);
    p.v_bar = parse_double(r[3]);
    p.eta = parse_double(r[4]);
    p.rho = parse_double(r[5]);
    p.s0 = parse_double(r[6]);
    p.v0 = parse_double(r[7]);
  }

  const fs::path paths_path = ctx.opts.out_dir / "paths.csv";
  const CsvTable t = read_stamped(paths_path, ctx.hash);
  if (t.rows.size() != cfg.n_paths * width) throw DependencyError(paths_path.string() + ": wrong number of rows");
  const std::size_t cs = t.column("s"), cv = t.column("v");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::size_t id = i / width;
    if (static_cast<std::size_t>(parse_int(t.rows[i][0])) != id ||
        static_cast<std::size_t>(parse_int(t.rows[i][1])) != i % width) {
      throw ParseError(paths_path.string(), t.row_lines[i], "rows out of order");
    }
    out[id].s.push_back(parse_double(t.rows[i][cs]));
    out[id].v.push_back(parse_double(t.rows[i][cv]));
  }
  return out;
}

CallSpec synthetic_spec(const RunConfig& cfg, const HestonParams& p) {
  return CallSpec::at_moneyness(p.s0, cfg.moneyness, PeriodGrid::kHorizon, cfg.hedge.r);
}

// Labeled paths as recorded by the label stage. Rewards are not reloaded;
// only the label index, series and daily deltas are needed downstream.
std::vector<LabeledPath> load_labeled(const StageContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const std::size_t width = static_cast<std::size_t>(PeriodGrid::kHorizon) + 1;
  std::vector<SimulatedPath> sims = load_simulated(ctx);
  std::vector<LabeledPath> out(cfg.n_paths);

  const fs::path series_path = ctx.opts.out_dir / "series.csv";
  const fs::path deltas_path = ctx.opts.out_dir / "deltas.csv";
  const fs::path labels_path = ctx.opts.out_dir / "labels.csv";
  const CsvTable st = read_stamped(series_path, ctx.hash);
  const CsvTable dt = read_stamped(deltas_path, ctx.hash);
  const CsvTable lt = read_stamped(labels_path, ctx.hash);
  if (st.rows.size() != cfg.n_paths * width || dt.rows.size() != cfg.n_paths * width ||
      lt.rows.size() != cfg.n_paths) {
    throw DependencyError("label artifacts in " + ctx.opts.out_dir.string() + " do not match n_paths");
  }
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    LabeledPath& lp = out[i];
    lp.path_id = i;
    lp.params = sims[i].params;
    lp.v = std::move(sims[i].v);
    MarketSeries& series = lp.priced.series;
    series.spec = synthetic_spec(cfg, lp.params);
    series.source = SeriesSource::kSynthetic;
    for (std::size_t d = 0; d < width; ++d) {
      const auto& sr = st.rows[i * width + d];
      series.s.push_back(parse_double(sr[2]));
      series.c.push_back(parse_double(sr[3]));
      lp.priced.delta.push_back(parse_double(dt.rows[i * width + d][2]));
    }
    const auto& lr = lt.rows[i];
    if (static_cast<std::size_t>(parse_int(lr[0])) != i) {
      throw ParseError(labels_path.string(), lt.row_lines[i], "path ids out of order");
    }
    lp.label.label_index = PeriodGrid::index_of(static_cast<int>(parse_int(lr[1])));
  }
  return out;
}

Dataset dataset_from(const RunConfig& cfg, const std::vector<LabeledPath>& paths) {
  return build_dataset(cfg.dataset_config(), paths);
}

std::map<ModelKind, EnsembleSpec> load_models(const StageContext& ctx) {
  std::map<ModelKind, EnsembleSpec> out;
  for (ModelKind kind : kKinds) {
    const fs::path dir = ctx.opts.out_dir / "models" / std::string(to_string(kind));
    EnsembleSpec e = load_ensemble(dir);
    for (int c : ctx.config.cutoffs) {
      if (!e.by_cutoff.contains(c)) {
        throw DependencyError(dir.string() + " has no models for cutoff " + std::to_string(c));
      }
    }
    out.emplace(kind, std::move(e));
  }
  return out;
}

// ---- backtest targets -------------------------------------------------------

struct Target {
  std::string name;
  MarketSeries series;
  std::vector<double> deltas;
};

Target synthetic_target(const LabeledPath& p) {
  return Target{"path_" + std::to_string(p.path_id), p.priced.series, p.priced.delta};
}

Target load_target(const StageContext& ctx, const std::vector<LabeledPath>& paths) {
  const RunConfig& cfg = ctx.config;
  if (!cfg.real.csv.empty()) {
    const MarketSeries series = ingest_real_target(cfg);
    return Target{"real", series, real_series_deltas(series, cfg.real)};
  }
  const std::size_t id = cfg.backtest_path_id < 0 ? n_train_paths(cfg) : static_cast<std::size_t>(cfg.backtest_path_id);
  if (id >= paths.size()) throw ConfigError("backtest path_id " + std::to_string(id) + " is out of range");
  return synthetic_target(paths[id]);
}

// The 13 strategies in report order for one series.
std::vector<NamedSchedule> all_schedules(const std::map<ModelKind, EnsembleSpec>& models, const MarketSeries& series) {
  std::vector<NamedSchedule> out;
  for (ModelKind kind : kKinds) {
    WeightSchedule w = weight_schedule(models.at(kind), series);
    w.provenance = std::string(to_string(kind));
    out.push_back(NamedSchedule{std::string(to_string(kind)), std::move(w)});
  }
  for (std::size_t k = 0; k < PeriodGrid::kSize; ++k) {
    out.push_back(NamedSchedule{std::to_string(PeriodGrid::tau(k)), WeightSchedule::fixed_period(k, series.size())});
  }
  return out;
}

std::string opt_to_string(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

// ---- stages -----------------------------------------------------------------

void stage_simulate(StageContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const DatasetConfig dc = cfg.dataset_config();
  const auto n_days = static_cast<std::size_t>(PeriodGrid::kHorizon);
  std::vector<HestonParams> params(cfg.n_paths);
  std::vector<SinglePath> sims(cfg.n_paths);
  parallel_for(cfg.n_paths, ctx.opts.threads, [&](std::size_t i) {
    params[i] = path_params(dc, i);
    sims[i] = simulate_path(params[i], n_days, cfg.substeps, cfg.seed, i);
  });
  ctx.log("simulated " + std::to_string(cfg.n_paths) + " paths");

  std::string paths_csv = "path_id,day,s,v\n";
  std::string params_csv = params_csv_header();
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    for (std::size_t d = 0; d <= n_days; ++d) {
      paths_csv += std::to_string(i) + "," + std::to_string(d) + "," + format_double(sims[i].s[d]) + "," +
                   format_double(sims[i].v[d]) + "\n";
    }
    params_csv += params_csv_row(i, params[i]);
  }
  ctx.write_csv("paths.csv", paths_csv);
  ctx.write_csv("params.csv", params_csv);
  ctx.write_manifest(Json{{"n_paths", cfg.n_paths},
                          {"n_days", n_days},
                          {"substeps", cfg.substeps},
                          {"param_stream", "params"},
                          {"path_stream", "path"},
                          {"ranges", ranges_to_json(cfg.ranges)}});
}

void stage_label(StageContext& ctx) {
  require_stage(ctx, Stage::kSimulate);
  const RunConfig& cfg = ctx.config;
  std::vector<SimulatedPath> sims = load_simulated(ctx);
  std::vector<PricedPath> priced(cfg.n_paths);
  std::vector<PeriodLabel> labels(cfg.n_paths);
  parallel_for(cfg.n_paths, ctx.opts.threads, [&](std::size_t i) {
    const CallSpec spec = synthetic_spec(cfg, sims[i].params);
    priced[i] = price_path_with_deltas(sims[i].s, sims[i].v, sims[i].params, spec);
    labels[i] = label_from_daily_deltas(priced[i].series, priced[i].delta, cfg.hedge);
  });
  ctx.log("priced and labeled " + std::to_string(cfg.n_paths) + " paths");

  std::string series_csv = "path_id,day,s,c\n";
  std::string deltas_csv = "path_id,day,delta\n";
  std::string labels_csv = label_csv_header();
  std::array<std::size_t, PeriodGrid::kSize> counts{};
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    const MarketSeries& s = priced[i].series;
    for (std::size_t d = 0; d < s.size(); ++d) {
      const std::string prefix = std::to_string(i) + "," + std::to_string(d) + ",";
      series_csv += prefix + format_double(s.s[d]) + "," + format_double(s.c[d]) + "\n";
      deltas_csv += prefix + format_double(priced[i].delta[d]) + "\n";
    }
    labels_csv += label_csv_row(i, labels[i]);
    ++counts[labels[i].label_index];
  }
  ctx.write_csv("series.csv", series_csv);
  ctx.write_csv("deltas.csv", deltas_csv);
  ctx.write_csv("labels.csv", labels_csv);
  const HistogramFit fit = fit_histogram_models(counts);
  ctx.write_csv("label_histogram.csv", histogram_csv(fit, counts));

  Json counts_json = Json::object();
  for (std::size_t k = 0; k < PeriodGrid::kSize; ++k) counts_json[std::to_string(PeriodGrid::tau(k))] = counts[k];
  ctx.write_manifest(Json{{"hedge", hedge_to_json(cfg.hedge)},
                          {"moneyness", cfg.moneyness},
                          {"label_counts", counts_json},
                          {"poisson_rate", fit.poisson_rate},
                          {"gaussian_mean", fit.gaussian_mean},
                          {"gaussian_std", fit.gaussian_std}});
}

void stage_train(StageContext& ctx) {
  require_stage(ctx, Stage::kLabel);
  const RunConfig& cfg = ctx.config;
  const std::vector<LabeledPath> paths = load_labeled(ctx);
  const Dataset all = dataset_from(cfg, paths);
  const auto [train, test] = split_by_path(all, cfg.test_fraction);
  write_dataset(all, ctx.opts.out_dir / "dataset", ctx.comment());
  {
    Json meta = Json::parse(dataset_manifest_json(all));
    meta["config_hash"] = ctx.hash;
    write_file(ctx.opts.out_dir / "dataset" / "dataset.json", meta.dump(2) + "\n");
  }
  for (int c : cfg.cutoffs) ctx.note_file("dataset/dataset_cutoff_" + std::to_string(c) + ".csv");
  ctx.note_file("dataset/dataset.json");

  const std::size_t n_cut = cfg.cutoffs.size();
  std::vector<std::vector<Sample>> train_by_cut(n_cut);
  for (std::size_t i = 0; i < n_cut; ++i) {
    train_by_cut[i] = train.for_cutoff(cfg.cutoffs[i]);
    if (train_by_cut[i].empty()) throw ConfigError("train: no training samples; raise n_paths or lower test_fraction");
  }

  // CNN members for every cutoff are independent jobs; each member's seed
  // depends only on (init_seed, cutoff, member).
  const std::size_t members = cfg.train.ensemble_size;
  std::vector<TrainedCnn> cnns(n_cut * members);
  std::vector<std::uint64_t> cut_seeds(n_cut);
  for (std::size_t i = 0; i < n_cut; ++i) {
    cut_seeds[i] = stream_seed(cfg.train.init_seed, StreamKind::kInit, 1000 + static_cast<std::uint64_t>(cfg.cutoffs[i]));
  }
  parallel_for(cnns.size(), ctx.opts.threads, [&](std::size_t job) {
    const std::size_t ci = job / members, m = job % members;
    TrainConfig tc = cfg.train;
    tc.init_seed = stream_seed(cut_seeds[ci], StreamKind::kInit, m);
    cnns[job] = cnn_train(train_by_cut[ci], tc);
  });
  ctx.log("trained " + std::to_string(cnns.size()) + " CNN members");

  // Baselines: one model per (kind, cutoff).
  const std::array<ModelKind, 4> baseline_kinds{ModelKind::kForest, ModelKind::kLinear, ModelKind::kBayes,
                                                ModelKind::kUniform};
  std::vector<AnyModel> baselines(baseline_kinds.size() * n_cut);
  parallel_for(baselines.size(), ctx.opts.threads, [&](std::size_t job) {
    const std::size_t ki = job / n_cut, ci = job % n_cut;
    BaselineHyper hyper = cfg.baseline;
    hyper.forest.seed = stream_seed(cfg.baseline.forest.seed, StreamKind::kBootstrap,
                                    1000 + static_cast<std::uint64_t>(cfg.cutoffs[ci]));
    baselines[job] = train_baseline(baseline_kinds[ki], train_by_cut[ci], hyper);
  });
  ctx.log("trained baselines");

  EnsembleSpec cnn_ens{ModelKind::kCnn, {}};
  std::string loss_csv = "cutoff_day,member,seed,epoch,loss\n";
  Json member_seeds = Json::object();
  for (std::size_t ci = 0; ci < n_cut; ++ci) {
    Json seeds = Json::array();
    for (std::size_t m = 0; m < members; ++m) {
      const TrainedCnn& t = cnns[ci * members + m];
      cnn_ens.by_cutoff[cfg.cutoffs[ci]].push_back(t.model);
      seeds.push_back(t.report.seed);
      for (std::size_t e = 0; e < t.report.loss_curve.size(); ++e) {
        loss_csv += std::to_string(cfg.cutoffs[ci]) + "," + std::to_string(m) + "," + std::to_string(t.report.seed) +
                    "," + std::to_string(e + 1) + "," + format_double(t.report.loss_curve[e]) + "\n";
      }
    }
    member_seeds[std::to_string(cfg.cutoffs[ci])] = seeds;
  }
  const Json train_json{{"learning_rate", cfg.train.learning_rate}, {"batch_size", cfg.train.batch_size},
                        {"epochs", cfg.train.epochs},               {"beta1", cfg.train.beta1},
                        {"beta2", cfg.train.beta2},                 {"epsilon", cfg.train.epsilon},
                        {"init_seed", cfg.train.init_seed},         {"ensemble_size", members},
                        {"member_seeds", member_seeds}};

  const auto save = [&](const EnsembleSpec& e, const Json& extra) {
    const std::string rel = "models/" + std::string(to_string(e.kind));
    Json stamped = extra;
    stamped["config_hash"] = ctx.hash;
    save_ensemble(e, ctx.opts.out_dir / rel, stamped.dump(), ctx.comment());
    ctx.note_file(rel + "/manifest.json");
  };
  save(cnn_ens, Json{{"config_hash", ctx.hash}, {"training", train_json}});
  ctx.write_csv("cnn_loss.csv", loss_csv);

  const auto& fc = cfg.baseline.forest;
  const auto& lc = cfg.baseline.logistic;
  for (std::size_t ki = 0; ki < baseline_kinds.size(); ++ki) {
    EnsembleSpec e{baseline_kinds[ki], {}};
    for (std::size_t ci = 0; ci < n_cut; ++ci) e.by_cutoff[cfg.cutoffs[ci]].push_back(baselines[ki * n_cut + ci]);
    Json extra{{"config_hash", ctx.hash}};
    if (e.kind == ModelKind::kForest) {
      extra["training"] = Json{{"n_trees", fc.n_trees},           {"max_depth", fc.max_depth},
                               {"min_samples_leaf", fc.min_samples_leaf}, {"features_per_split", fc.features_per_split},
                               {"bootstrap", fc.bootstrap},       {"seed", fc.seed}};
    } else if (e.kind == ModelKind::kLinear) {
      extra["training"] = Json{{"learning_rate", lc.learning_rate}, {"epochs", lc.epochs}, {"l2", lc.l2}};
    }
    save(e, extra);
  }

  ctx.write_manifest(Json{{"n_train_paths", n_train_paths(cfg)},
                          {"n_train_samples", train.samples.size()},
                          {"n_test_samples", test.samples.size()},
                          {"cutoffs", cfg.cutoffs}});
}

void stage_evaluate(StageContext& ctx) {
  require_stage(ctx, Stage::kTrain);
  const RunConfig& cfg = ctx.config;
  const auto models = load_models(ctx);
  const std::vector<LabeledPath> paths = load_labeled(ctx);
  const Dataset test = split_by_path(dataset_from(cfg, paths), cfg.test_fraction).second;

  std::string csv = "cutoff_day,model_kind,macro_auc";
  for (int tau : PeriodGrid::kTaus) csv += ",auc_" + std::to_string(tau);
  csv += "\n";
  Json summary = Json::object();
  for (int c : cfg.cutoffs) {
    const std::vector<Sample> samples = test.for_cutoff(c);
    std::vector<std::size_t> labels;
    for (const auto& s : samples) labels.push_back(s.label_index);
    for (ModelKind kind : kKinds) {
      std::vector<ProbVector> scores(samples.size());
      parallel_for(samples.size(), ctx.opts.threads,
                   [&](std::size_t i) { scores[i] = models.at(kind).predict(c, samples[i].features); });
      std::string row = std::to_string(c) + "," + std::string(to_string(kind)) + ",";
      std::optional<OvrAuc> auc;
      try {
        auc = roc_auc_ovr(scores, labels);
      } catch (const InputError&) {
        // fewer than two classes among the held-out labels: AUC undefined
      }
      if (auc) {
        row += format_double(auc->macro);
        for (const auto& pc : auc->per_class) row += "," + opt_to_string(pc);
        summary[std::to_string(c)][std::string(to_string(kind))] = auc->macro;
      } else {
        row += std::string(PeriodGrid::kSize, ',');
        summary[std::to_string(c)][std::string(to_string(kind))] = nullptr;
      }
      csv += row + "\n";
    }
  }
  ctx.write_csv("auc_report.csv", csv);
  ctx.write_manifest(Json{{"n_test_paths", cfg.n_paths - n_train_paths(cfg)}, {"macro_auc", summary}});
}

void stage_backtest(StageContext& ctx) {
  require_stage(ctx, Stage::kTrain);
  const RunConfig& cfg = ctx.config;
  const auto models = load_models(ctx);
  const std::vector<LabeledPath> paths = load_labeled(ctx);
  const Target target = load_target(ctx, paths);
  const std::vector<NamedSchedule> schedules = all_schedules(models, target.series);

  std::vector<std::pair<std::string, StrategyMetrics>> metrics;
  std::string rewards = "strategy,reward,numerator,cost_sum,tracking_std,n_trades\n";
  for (const auto& ns : schedules) {
    const BacktestReport report = multiscale_backtest(target.series, target.deltas, ns.schedule, cfg.hedge);
    ctx.write_csv("report_" + ns.name + ".csv", report_csv(report));
    ctx.write_csv("weights_" + ns.name + ".csv", weights_csv(ns.schedule));
    metrics.emplace_back(ns.name, strategy_metrics(report, target.series));
    const RewardBreakdown rb = generalized_reward(report, target.series, cfg.hedge);
    rewards += ns.name + "," + format_double(rb.reward) + "," + format_double(rb.numerator()) + "," +
               format_double(rb.cost_sum) + "," + format_double(rb.tracking_std) + "," +
               std::to_string(report.trade_days.size()) + "\n";
  }
  ctx.write_csv("metrics.csv", metrics_csv(metrics));
  ctx.write_csv("rewards.csv", rewards);

  std::string series_csv = "day,s,c,delta\n";
  for (std::size_t d = 0; d < target.series.size(); ++d) {
    series_csv += std::to_string(d) + "," + format_double(target.series.s[d]) + "," +
                  format_double(target.series.c[d]) + "," + format_double(target.deltas[d]) + "\n";
  }
  ctx.write_csv("target_series.csv", series_csv);
  ctx.write_manifest(Json{{"target", target.name},
                          {"source", target.series.source == SeriesSource::kReal ? "real" : "synthetic"},
                          {"spec", spec_to_json(target.series.spec)},
                          {"hedge", hedge_to_json(cfg.hedge)},
                          {"strategies", strategy_names()}});
}

void stage_sweep(StageContext& ctx) {
  require_stage(ctx, Stage::kTrain);
  const RunConfig& cfg = ctx.config;
  const auto models = load_models(ctx);
  const std::vector<LabeledPath> paths = load_labeled(ctx);

  const Target target = load_target(ctx, paths);
  const std::vector<NamedSchedule> target_sched = all_schedules(models, target.series);
  const auto entries = gamma_sweep(target.series, target.deltas, target_sched, cfg.hedge, cfg.sweep_gammas);
  ctx.write_csv("sweep.csv", sweep_csv(entries));

  // Over held-out paths: how often each strategy attains the best reward.
  const std::size_t first = n_train_paths(cfg);
  const std::size_t n = std::min(cfg.sweep_paths, paths.size() - first);
  const std::vector<std::string> names = strategy_names();
  const std::size_t n_g = cfg.sweep_gammas.size(), n_s = names.size();
  std::vector<std::vector<SweepEntry>> per_path(n);
  parallel_for(n, ctx.opts.threads, [&](std::size_t i) {
    const LabeledPath& p = paths[first + i];
    const auto sched = all_schedules(models, p.priced.series);
    per_path[i] = gamma_sweep(p.priced.series, p.priced.delta, sched, cfg.hedge, cfg.sweep_gammas);
  });
  std::vector<double> wins(n_g * n_s, 0.0), gap_sum(n_g * n_s, 0.0);
  for (const auto& rows : per_path) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      gap_sum[j] += rows[j].reward_gap;
      if (rows[j].reward_gap == 0.0) wins[j] += 1.0;
    }
  }
  std::string csv = "gamma,strategy,win_fraction,mean_reward_gap\n";
  for (std::size_t g = 0; g < n_g; ++g) {
    for (std::size_t s = 0; s < n_s; ++s) {
      const double denom = n > 0 ? static_cast<double>(n) : 1.0;
      csv += format_double(cfg.sweep_gammas[g]) + "," + names[s] + "," + format_double(wins[g * n_s + s] / denom) +
             "," + format_double(gap_sum[g * n_s + s] / denom) + "\n";
    }
  }
  ctx.write_csv("sweep_win_fraction.csv", csv);
  ctx.write_manifest(Json{{"target", target.name}, {"gammas", cfg.sweep_gammas}, {"n_sweep_paths", n},
                          {"first_sweep_path", first}});
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kSimulate: return "simulate";
    case Stage::kLabel: return "label";
    case Stage::kTrain: return "train";
    case Stage::kEvaluate: return "evaluate";
    case Stage::kBacktest: return "backtest";
    case Stage::kSweep: return "sweep";
  }
  return "?";
}

Stage stage_from_string(std::string_view name) {
  for (Stage s : kStages) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown stage '" + std::string(name) + "'");
}

std::vector<Stage> all_stages() { return {kStages.begin(), kStages.end()}; }

std::vector<double> realized_variance_path(std::span<const double> s, std::size_t window, double v0) {
  if (window < 1) throw ConfigError("variance_window must be >= 1");
  std::vector<double> v(s.size(), v0);
  for (std::size_t t = 1; t < s.size(); ++t) {
    const std::size_t lo = t >= window ? t - window + 1 : 1;
    double sum = 0.0;
    for (std::size_t j = lo; j <= t; ++j) {
      const double r = std::log(s[j] / s[j - 1]);
      sum += r * r;
    }
    v[t] = sum / static_cast<double>(t - lo + 1);
  }
  return v;
}

std::vector<double> real_series_deltas(const MarketSeries& series, const RealDataConfig& real) {
  const std::vector<double> v = realized_variance_path(series.s, real.variance_window, real.params.v0);
  return path_deltas(series.s, v, real.params, series.spec);
}

MarketSeries ingest_real_target(const RunConfig& cfg) {
  const double strike = cfg.real.strike > 0.0 ? cfg.real.strike : 0.0;
  const auto rows = parse_market_csv(read_file(cfg.real.csv), cfg.real.csv.string());
  // The strike default depends on the first kept row, so ingest once to find it.
  CallSpec spec;
  spec.r = cfg.hedge.r;
  spec.maturity_day = PeriodGrid::kHorizon;
  spec.moneyness0 = cfg.moneyness;
  spec.strike = strike > 0.0 ? strike : 1.0;
  MarketSeries series = ingest_market_rows(rows, spec, IngestOptions{cfg.real.truncate, cfg.real.force},
                                           cfg.real.csv.string());
  if (strike <= 0.0) {
    series.spec.strike = series.s[0] / cfg.moneyness;
  } else {
    series.spec.moneyness0 = series.s[0] / strike;
  }
  series.spec.validate();
  return series;
}

void run_pipeline(const RunConfig& config, Stage stage, const PipelineOptions& opts) {
  config.validate();
  StageContext ctx{config, opts, stage, config.hash(), {}};
  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + opts.out_dir.string() + ": " + ec.message());
  switch (stage) {
    case Stage::kSimulate: stage_simulate(ctx); break;
    case Stage::kLabel: stage_label(ctx); break;
    case Stage::kTrain: stage_train(ctx); break;
    case Stage::kEvaluate: stage_evaluate(ctx); break;
    case Stage::kBacktest: stage_backtest(ctx); break;
    case Stage::kSweep: stage_sweep(ctx); break;
  }
}

std::vector<std::string> stage_outputs(const fs::path& out_dir, Stage stage) {
  const Json j = read_manifest(out_dir, stage);
  std::vector<std::string> out{manifest_name(stage)};
  for (const auto& f : j.at("files")) out.push_back(f.get<std::string>());
  return out;
}

}  // namespace mshedge
