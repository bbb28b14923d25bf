#include "mshedge/heston_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json_io.hpp"
#include "mshedge/errors.hpp"
#include "mshedge/parallel.hpp"
#include "mshedge/random.hpp"
#include "mshedge/text_io.hpp"

namespace mshedge {

namespace {

void check_interval(const Interval& iv, const char* name, double lo_bound, double hi_bound) {
  if (!(iv.lo <= iv.hi)) {
    throw ConfigError(std::string("range for ") + name + " is empty or inverted");
  }
  if (iv.lo < lo_bound || iv.hi > hi_bound) {
    throw ConfigError(std::string("range for ") + name + " leaves the parameter domain");
  }
}

double draw(Rng& rng, const Interval& iv) {
  // Always consume one variate so the field order fixes the stream layout.
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (iv.lo == iv.hi) return iv.lo;
  return std::min(iv.hi, iv.lo + (iv.hi - iv.lo) * u);
}

}  // namespace

void HestonParams::validate() const {
  if (!(s0 > 0.0)) throw ConfigError("heston: s0 must be > 0");
  if (!(v0 >= 0.0)) throw ConfigError("heston: v0 must be >= 0");
  if (!(v_bar >= 0.0)) throw ConfigError("heston: v_bar must be >= 0");
  if (!(a >= 0.0)) throw ConfigError("heston: a must be >= 0");
  if (!(eta >= 0.0)) throw ConfigError("heston: eta must be >= 0");
  if (!(rho >= -1.0 && rho <= 1.0)) throw ConfigError("heston: rho must lie in [-1, 1]");
  if (!std::isfinite(mu)) throw ConfigError("heston: mu must be finite");
}

void ParamRanges::validate() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  check_interval(mu, "mu", -inf, inf);
  check_interval(a, "a", 0.0, inf);
  check_interval(v_bar, "v_bar", 0.0, inf);
  check_interval(eta, "eta", 0.0, inf);
  check_interval(rho, "rho", -1.0, 1.0);
  check_interval(v0, "v0", 0.0, inf);
  check_interval(s0, "s0", std::numeric_limits<double>::min(), inf);
}

HestonParams sample_params(const ParamRanges& ranges, std::uint64_t seed) {
  ranges.validate();
  Rng rng(mix64(seed));
  HestonParams p;
  p.mu = draw(rng, ranges.mu);
  p.a = draw(rng, ranges.a);
  p.v_bar = draw(rng, ranges.v_bar);
  p.eta = draw(rng, ranges.eta);
  p.rho = draw(rng, ranges.rho);
  p.s0 = draw(rng, ranges.s0);
  p.v0 = draw(rng, ranges.v0);
  return p;
}

SinglePath simulate_path(const HestonParams& params, std::size_t n_days, std::size_t substeps,
                         std::uint64_t master_seed, std::uint64_t stream_id) {
  params.validate();
  if (n_days < 1 || substeps < 1) throw ConfigError("simulate: n_days and substeps must be >= 1");

  Rng rng = make_rng(master_seed, StreamKind::kPath, stream_id);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double dt = 1.0 / static_cast<double>(substeps);
  const double sqrt_dt = std::sqrt(dt);

  SinglePath out;
  out.s.resize(n_days + 1);
  out.v.resize(n_days + 1);
  out.s[0] = params.s0;
  out.v[0] = params.v0;

  double log_s = std::log(params.s0);
  double v = params.v0;
  for (std::size_t day = 1; day <= n_days; ++day) {
    for (std::size_t k = 0; k < substeps; ++k) {
      const double z1 = normal(rng);
      const double zp = normal(rng);
      const double z2 = correlated_normal(z1, zp, params.rho);
      const double v_pos = std::max(v, 0.0);
      const double vol = std::sqrt(v_pos);
      log_s += (params.mu - 0.5 * v_pos) * dt + vol * sqrt_dt * z1;
      v += params.a * (params.v_bar - v_pos) * dt + params.eta * vol * sqrt_dt * z2;
    }
    out.s[day] = std::exp(log_s);
    out.v[day] = std::max(v, 0.0);
  }
  return out;
}

PathSet simulate_paths(const HestonParams& params, std::size_t n_days, std::size_t substeps,
                       std::size_t n_paths, std::uint64_t master_seed, std::size_t threads) {
  if (n_paths < 1) throw ConfigError("simulate: n_paths must be >= 1");
  PathSet set;
  set.params = params;
  set.n_paths = n_paths;
  set.n_days = n_days;
  set.substeps = substeps;
  set.master_seed = master_seed;
  set.stream_ids.resize(n_paths);
  set.s.assign(n_paths * (n_days + 1), 0.0);
  set.v.assign(n_paths * (n_days + 1), 0.0);
  parallel_for(n_paths, threads, [&](std::size_t i) {
    set.stream_ids[i] = i;
    SinglePath p = simulate_path(params, n_days, substeps, master_seed, i);
    std::copy(p.s.begin(), p.s.end(), set.s.begin() + static_cast<std::ptrdiff_t>(i * (n_days + 1)));
    std::copy(p.v.begin(), p.v.end(), set.v.begin() + static_cast<std::ptrdiff_t>(i * (n_days + 1)));
  });
  return set;
}

std::string pathset_to_csv(const PathSet& paths, const std::string& header_comment) {
  std::string out;
  if (!header_comment.empty()) out += "# " + header_comment + "\n";
  out += "path_id,day,s,v\n";
  for (std::size_t i = 0; i < paths.n_paths; ++i) {
    auto s = paths.s_row(i);
    auto v = paths.v_row(i);
    for (std::size_t t = 0; t < paths.width(); ++t) {
      out += std::to_string(paths.stream_ids[i]) + ',' + std::to_string(t) + ',' + format_double(s[t]) +
             ',' + format_double(v[t]) + '\n';
    }
  }
  return out;
}

std::string pathset_sidecar_json(const PathSet& paths) {
  Json j;
  j["params"] = params_to_json(paths.params);
  j["n_paths"] = paths.n_paths;
  j["n_days"] = paths.n_days;
  j["substeps"] = paths.substeps;
  j["master_seed"] = paths.master_seed;
  j["stream_ids"] = paths.stream_ids;
  return j.dump(2) + "\n";
}

void write_pathset(const PathSet& paths, const std::filesystem::path& csv_path) {
  write_file(csv_path, pathset_to_csv(paths));
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  write_file(sidecar, pathset_sidecar_json(paths));
}

std::string to_json_string(const HestonParams& p) { return params_to_json(p).dump(); }

}  // namespace mshedge
