#include "mshedge/pricer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "json_io.hpp"
#include "mshedge/errors.hpp"
#include "mshedge/text_io.hpp"

namespace mshedge {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

// exp(z) - 1 without cancellation for small |z|.
cplx expm1_c(cplx z) {
  const double x = z.real();
  const double y = z.imag();
  const double half_sin = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * half_sin * half_sin, std::exp(x) * std::sin(y)};
}

// log(1 + w) / w, continuous at w = 0.
cplx log1p_over(cplx w) {
  if (std::abs(w) < 1e-5) return 1.0 - w / 2.0 + w * w / 3.0 - w * w * w / 4.0;
  return std::log(1.0 + w) / w;
}

// log E[exp(iu (ln S_T - ln s - r tau))]; u may be complex.
cplx log_cf_core(cplx u, const HestonParams& p, double v, double tau) {
  const double eta2 = p.eta * p.eta;
  const cplx q = u * u + kI * u;
  const cplx beta = p.a - p.rho * p.eta * kI * u;
  const cplx d = std::sqrt(beta * beta + eta2 * q);
  const cplx bd = beta + d;
  if (std::abs(bd) == 0.0) {
    throw NumericalError("heston_cf: beta + d vanished (a = 0 and eta = 0?)");
  }
  // (beta - d) / eta^2 rewritten via beta^2 - d^2 = -eta^2 q.
  const cplx r_minus = -q / bd;
  const cplx g = eta2 * r_minus / bd;
  const cplx e = std::exp(-d * tau);
  const cplx one_minus_e = -expm1_c(-d * tau);
  const cplx w = g * one_minus_e / (1.0 - g);
  const cplx w_over_eta2 = r_minus / bd * one_minus_e / (1.0 - g);
  const cplx big_c = p.a * p.v_bar * (r_minus * tau - 2.0 * w_over_eta2 * log1p_over(w));
  const cplx big_d = r_minus * one_minus_e / (1.0 - g * e);
  return big_c + big_d * v;
}

void check_finite(cplx z, const char* what, cplx u) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw NumericalError(std::string("heston_cf: non-finite ") + what + " at u = (" +
                         format_double(u.real()) + ", " + format_double(u.imag()) + ")");
  }
}

struct PanelSum {
  double p1 = 0.0;
  double p2 = 0.0;
  double magnitude = 0.0;  // max |integrand envelope| over the nodes
};

class GilPelaezIntegrator {
 public:
  GilPelaezIntegrator(const HestonParams& p, double v, double tau, double r, double log_moneyness)
      : p_(p), v_(v), tau_(tau), drift_(r * tau), x_(log_moneyness) {}

  // Integrals of Re[e^{iux} psi_j(u) / (iu)] over (0, inf), j = 1, 2.
  std::pair<double, double> integrate() {
    const double sd = std::sqrt(std::max({v_, p_.v_bar, 1e-14}) * tau_);
    const double width = 1.0 / (sd + 0.25 * std::abs(x_));
    constexpr double kDecay = 1e-12;
    constexpr double kMaxU = 1e8;
    double a = 0.0;
    double total1 = 0.0;
    double total2 = 0.0;
    double last_mag = 0.0;
    while (true) {
      const double b = a + width;
      PanelSum whole = gauss(a, b);
      PanelSum acc;
      refine(a, b, whole, 0, acc);
      total1 += acc.p1;
      total2 += acc.p2;
      last_mag = acc.magnitude;
      if (last_mag < kDecay) break;
      a = b;
      if (a > kMaxU) {
        throw NumericalError("heston quadrature did not converge: " + std::to_string(nodes_) +
                             " nodes, residual integrand " + format_double(last_mag) + " at u = " +
                             format_double(a));
      }
    }
    return {total1, total2};
  }

  int nodes() const { return nodes_; }

 private:
  using Rule = boost::math::quadrature::gauss<double, 16>;
  static constexpr int kMaxDepth = 10;
  static constexpr double kPanelTol = 1e-14;

  PanelSum gauss(double a, double b) {
    const auto& xs = Rule::abscissa();
    const auto& ws = Rule::weights();
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    PanelSum out;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      for (double sign : {-1.0, 1.0}) {
        const double u = mid + sign * half * xs[k];
        auto [f1, f2, m] = integrand(u);
        out.p1 += ws[k] * f1;
        out.p2 += ws[k] * f2;
        out.magnitude = std::max(out.magnitude, m);
      }
    }
    out.p1 *= half;
    out.p2 *= half;
    return out;
  }

  void refine(double a, double b, const PanelSum& whole, int depth, PanelSum& acc) {
    const double m = 0.5 * (a + b);
    PanelSum left = gauss(a, m);
    PanelSum right = gauss(m, b);
    const double err = std::max(std::abs(left.p1 + right.p1 - whole.p1), std::abs(left.p2 + right.p2 - whole.p2));
    if (err <= kPanelTol || depth >= kMaxDepth) {
      acc.p1 += left.p1 + right.p1;
      acc.p2 += left.p2 + right.p2;
      acc.magnitude = std::max({acc.magnitude, left.magnitude, right.magnitude});
      return;
    }
    refine(a, m, left, depth + 1, acc);
    refine(m, b, right, depth + 1, acc);
  }

  std::tuple<double, double, double> integrand(double u) {
    ++nodes_;
    const cplx phase = kI * u * (x_ + drift_);
    const cplx z1 = phase + log_cf_core(cplx(u, -1.0), p_, v_, tau_);
    const cplx z2 = phase + log_cf_core(cplx(u, 0.0), p_, v_, tau_);
    const cplx psi1 = std::exp(z1);
    const cplx psi2 = std::exp(z2);
    check_finite(psi1, "P1 integrand", {u, -1.0});
    check_finite(psi2, "P2 integrand", {u, 0.0});
    // Re[psi / (iu)] = Im[psi] / u
    return {psi1.imag() / u, psi2.imag() / u, std::max(std::abs(psi1), std::abs(psi2)) / u};
  }

  const HestonParams& p_;
  double v_;
  double tau_;
  double drift_;
  double x_;
  int nodes_ = 0;
};

}  // namespace

CallSpec CallSpec::at_moneyness(double s0, double moneyness, int maturity_day, double r) {
  CallSpec spec;
  spec.moneyness0 = moneyness;
  spec.strike = s0 / moneyness;
  spec.maturity_day = maturity_day;
  spec.r = r;
  spec.validate();
  return spec;
}

void CallSpec::validate() const {
  if (!(strike > 0.0)) throw ConfigError("call spec: strike must be > 0");
  if (maturity_day < 1) throw ConfigError("call spec: maturity_day must be >= 1");
  if (!std::isfinite(r)) throw ConfigError("call spec: r must be finite");
}

void MarketSeries::validate() const {
  if (s.size() != c.size()) throw InputError("market series: s and c lengths differ");
  if (s.size() != static_cast<std::size_t>(spec.maturity_day) + 1) {
    throw InputError("market series: expected " + std::to_string(spec.maturity_day + 1) + " days, got " +
                     std::to_string(s.size()));
  }
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (!(s[t] >= 0.0) || !(c[t] >= 0.0)) throw InputError("market series: negative or NaN price at day " + std::to_string(t));
  }
  if (source == SeriesSource::kSynthetic) {
    const double intrinsic = std::max(s.back() - spec.strike, 0.0);
    if (c.back() != intrinsic) throw InputError("market series: terminal call price is not intrinsic");
  }
}

std::complex<double> heston_cf(std::complex<double> u, const HestonParams& params, double s, double v,
                               double tau, double r) {
  if (!(tau > 0.0)) throw InputError("heston_cf: tau must be > 0");
  const cplx z = kI * u * (std::log(s) + r * tau) + log_cf_core(u, params, v, tau);
  check_finite(z, "exponent", u);
  const cplx out = std::exp(z);
  check_finite(out, "value", u);
  return out;
}

HestonQuote heston_quote(const HestonParams& params, double s, double v, const CallSpec& spec, double tau) {
  if (!(tau >= 0.0)) throw InputError("heston pricer: tau must be >= 0");
  const double k = spec.strike;
  HestonQuote q;
  if (tau == 0.0) {
    q.price = std::max(s - k, 0.0);
    q.delta = s > k ? 1.0 : (s < k ? 0.0 : 0.5);
    return q;
  }
  GilPelaezIntegrator integ(params, std::max(v, 0.0), tau, spec.r, std::log(s / k));
  auto [i1, i2] = integ.integrate();
  const double p1 = 0.5 + i1 / std::numbers::pi;
  const double p2 = 0.5 + i2 / std::numbers::pi;
  const double discount = std::exp(-spec.r * tau);
  const double raw = s * p1 - k * discount * p2;
  // Quadrature noise can leave the no-arbitrage band by ~1e-13.
  q.price = std::clamp(raw, std::max(s - k * discount, 0.0), s);
  q.delta = std::clamp(p1, 0.0, 1.0);
  q.nodes = integ.nodes();
  return q;
}

double heston_call_price(const HestonParams& params, double s, double v, const CallSpec& spec, double tau) {
  return heston_quote(params, s, v, spec, tau).price;
}

double heston_delta(const HestonParams& params, double s, double v, const CallSpec& spec, double tau) {
  return heston_quote(params, s, v, spec, tau).delta;
}

double bs_call_price(double s, double strike, double sigma, double tau, double r) {
  const double discounted_k = strike * std::exp(-r * tau);
  const double total_sd = sigma * std::sqrt(tau);
  if (tau <= 0.0 || total_sd <= 0.0) return std::max(s - discounted_k, 0.0);
  const double d1 = (std::log(s / discounted_k) + 0.5 * total_sd * total_sd) / total_sd;
  const double d2 = d1 - total_sd;
  auto ncdf = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
  return s * ncdf(d1) - discounted_k * ncdf(d2);
}

PricedPath price_path_with_deltas(std::span<const double> s, std::span<const double> v,
                                  const HestonParams& params, const CallSpec& spec) {
  spec.validate();
  const std::size_t n = static_cast<std::size_t>(spec.maturity_day) + 1;
  if (s.size() != n || v.size() != n) {
    throw InputError("price_path: expected sequences of length " + std::to_string(n));
  }
  PricedPath out;
  out.series.spec = spec;
  out.series.source = SeriesSource::kSynthetic;
  out.series.s.assign(s.begin(), s.end());
  out.series.c.resize(n);
  out.delta.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double tau = static_cast<double>(spec.maturity_day) - static_cast<double>(t);
    HestonQuote q = heston_quote(params, s[t], v[t], spec, tau);
    out.series.c[t] = q.price;
    out.delta[t] = q.delta;
  }
  return out;
}

MarketSeries price_path(std::span<const double> s, std::span<const double> v, const HestonParams& params,
                        const CallSpec& spec) {
  return price_path_with_deltas(s, v, params, spec).series;
}

std::vector<double> path_deltas(std::span<const double> s, std::span<const double> v,
                                const HestonParams& params, const CallSpec& spec) {
  return price_path_with_deltas(s, v, params, spec).delta;
}

std::string series_to_csv(const MarketSeries& series) {
  std::string out = "day,s,c\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    out += std::to_string(t) + ',' + format_double(series.s[t]) + ',' + format_double(series.c[t]) + '\n';
  }
  return out;
}

std::string series_sidecar_json(const MarketSeries& series) {
  Json j;
  j["spec"] = spec_to_json(series.spec);
  j["source"] = series.source == SeriesSource::kSynthetic ? "synthetic" : "real";
  return j.dump(2) + "\n";
}

void write_series(const MarketSeries& series, const std::filesystem::path& csv_path) {
  write_file(csv_path, series_to_csv(series));
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  write_file(sidecar, series_sidecar_json(series));
}

MarketSeries read_series(const std::filesystem::path& csv_path) {
  CsvTable table = read_csv(csv_path);
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  Json meta = Json::parse(read_file(sidecar));
  MarketSeries series;
  series.spec = spec_from_json(meta.at("spec"));
  series.source = meta.at("source").get<std::string>() == "real" ? SeriesSource::kReal : SeriesSource::kSynthetic;
  const auto ci_day = table.column("day");
  const auto ci_s = table.column("s");
  const auto ci_c = table.column("c");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    try {
      if (parse_int(row[ci_day]) != static_cast<long long>(i)) {
        throw InputError("days must run 0, 1, 2, ...");
      }
      series.s.push_back(parse_double(row[ci_s]));
      series.c.push_back(parse_double(row[ci_c]));
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(csv_path.string(), table.row_lines[i], e.what());
    }
  }
  series.validate();
  return series;
}

}  // namespace mshedge
