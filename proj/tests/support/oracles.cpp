#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace oracle {

namespace {

constexpr std::array<int, 8> kTaus{1, 2, 3, 5, 6, 10, 15, 30};

struct BoxMuller {
  std::mt19937 gen;
  std::uniform_real_distribution<double> unif{0.0, 1.0};
  bool has_spare = false;
  double spare = 0.0;

  explicit BoxMuller(std::uint32_t seed) : gen(seed) {}

  double operator()() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    double u1 = unif(gen);
    while (u1 <= 0.0) u1 = unif(gen);
    const double u2 = unif(gen);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    spare = rad * std::sin(2.0 * std::numbers::pi * u2);
    has_spare = true;
    return rad * std::cos(2.0 * std::numbers::pi * u2);
  }
};

double norm_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

}  // namespace

McEstimate mc_heston_call(double a, double v_bar, double eta, double rho, double s, double v, double strike,
                          double tau_days, double r, std::size_t n_paths, std::size_t steps_per_day,
                          std::uint32_t seed) {
  BoxMuller normal(seed);
  const auto n_steps = static_cast<std::size_t>(std::llround(tau_days * static_cast<double>(steps_per_day)));
  const double dt = tau_days / static_cast<double>(n_steps);
  const double disc = std::exp(-r * tau_days);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    double x = std::log(s);
    double var = v;
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double w1 = normal();
      const double w2 = rho * w1 + std::sqrt(1.0 - rho * rho) * normal();
      const double vp = var > 0.0 ? var : 0.0;
      x += (r - vp / 2.0) * dt + std::sqrt(vp * dt) * w1;
      var += a * (v_bar - vp) * dt + eta * std::sqrt(vp * dt) * w2;
    }
    const double payoff = disc * std::max(std::exp(x) - strike, 0.0);
    sum += payoff;
    sum_sq += payoff * payoff;
  }
  const double n = static_cast<double>(n_paths);
  const double mean = sum / n;
  const double var = (sum_sq - n * mean * mean) / (n - 1.0);
  return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

std::complex<double> lognormal_cf(std::complex<double> u, double s, double sigma2, double tau, double r) {
  const std::complex<double> i(0.0, 1.0);
  const double m = std::log(s) + (r - sigma2 / 2.0) * tau;
  return std::exp(i * u * m - sigma2 * tau * u * u / 2.0);
}

double bs_call_erf(double s, double strike, double sigma, double tau, double r) {
  const double sd = sigma * std::sqrt(tau);
  const double df = std::exp(-r * tau);
  if (sd == 0.0) return std::max(s - strike * df, 0.0);
  const double d1 = (std::log(s / strike) + r * tau) / sd + sd / 2.0;
  return s * norm_cdf(d1) - strike * df * norm_cdf(d1 - sd);
}

double cir_mean(double v0, double v_bar, double a, double t) { return v_bar + (v0 - v_bar) * std::exp(-a * t); }

DirectReward direct_reward(const std::vector<double>& s, const std::vector<double>& c,
                           const std::vector<double>& daily, int tau, double f, double gamma, double r,
                           bool cost_at_previous) {
  const int horizon = static_cast<int>(s.size()) - 1;
  const int n = horizon / tau;
  DirectReward out{};
  out.pi0 = c[0] - daily[0] * s[0];
  double cost = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double price = cost_at_previous ? s[j * tau - tau] : s[j * tau];
    cost += f * price * std::fabs(daily[j * tau] - daily[j * tau - tau]);
  }
  double sq = 0.0;
  for (int i = 0; i <= n - 1; ++i) {
    for (int j = 1; j <= tau; ++j) {
      const double held = daily[i * tau];
      const double before = c[i * tau] - held * s[i * tau];
      const double after = c[i * tau + j] - held * s[i * tau + j];
      sq += (before - after) * (before - after);
    }
  }
  out.cost = cost;
  out.numerator = out.pi0 * (std::exp(r * tau * n) - f) - cost;
  out.tracking_std = std::sqrt(sq / (n * tau));
  out.reward = out.numerator / (gamma + out.tracking_std);
  return out;
}

DayLoop day_loop_backtest(const std::vector<double>& s, const std::vector<double>& c,
                          const std::vector<double>& daily, const std::vector<std::array<double, 8>>& weights,
                          double f, double r) {
  const std::size_t n = s.size();
  DayLoop out;
  for (std::size_t t = 0; t < n; ++t) {
    double d = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
      const std::size_t tau = static_cast<std::size_t>(kTaus[k]);
      d += weights[t][k] * daily[(t / tau) * tau];
    }
    out.delta.push_back(d);
  }
  double cash = 0.0, paid = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      const double trade = out.delta[t] - out.delta[t - 1];
      const double fee = f * s[t] * std::fabs(trade);
      cash = cash * std::exp(r) + trade * s[t] - fee;
      paid += fee;
    }
    out.cash.push_back(cash);
    out.cost.push_back(paid);
    out.wealth.push_back(c[t] - out.delta[t] * s[t] + cash);
  }
  return out;
}

std::vector<double> fixed_frequency_wealth(const std::vector<double>& s, const std::vector<double>& c,
                                           const std::vector<double>& daily, int tau, double f, double r) {
  std::vector<double> wealth;
  double held = daily[0];
  double cash = 0.0;
  wealth.push_back(c[0] - held * s[0]);
  for (std::size_t t = 1; t < s.size(); ++t) {
    cash *= std::exp(r);
    if (t % static_cast<std::size_t>(tau) == 0) {
      const double target = daily[t];
      cash += (target - held) * s[t] - f * s[t] * std::fabs(target - held);
      held = target;
    }
    wealth.push_back(c[t] - held * s[t] + cash);
  }
  return wealth;
}

DirectReward direct_generalized_reward(const std::vector<double>& s, const std::vector<double>& c,
                                       const std::vector<double>& delta, const std::vector<bool>& rebalance,
                                       double f, double gamma, double r) {
  const std::size_t n = s.size();
  const int horizon = static_cast<int>(n) - 1;
  DirectReward out{};
  out.pi0 = c[0] - delta[0] * s[0];
  double cost = 0.0;
  for (std::size_t t = 1; t < n; ++t) {
    if (!rebalance[t]) continue;
    std::size_t prev = t - 1;
    while (prev > 0 && !rebalance[prev]) --prev;
    cost += f * s[prev] * std::fabs(delta[t] - delta[prev]);
  }
  double sq = 0.0;
  for (std::size_t t = 1; t < n; ++t) {
    std::size_t ref = t - 1;
    while (ref > 0 && !rebalance[ref]) --ref;
    const double d = (c[ref] - delta[ref] * s[ref]) - (c[t] - delta[ref] * s[t]);
    sq += d * d;
  }
  out.cost = cost;
  out.numerator = out.pi0 * (std::exp(r * horizon) - f) - cost;
  out.tracking_std = std::sqrt(sq / horizon);
  out.reward = out.numerator / (gamma + out.tracking_std);
  return out;
}

std::vector<bool> rebalance_flags(const std::vector<std::array<double, 8>>& weights) {
  std::vector<bool> flags(weights.size(), false);
  for (std::size_t t = 1; t < weights.size(); ++t) {
    bool any = weights[t] != weights[t - 1];
    for (std::size_t k = 0; k < 8; ++k) {
      const bool used = weights[t][k] > 0.0 || weights[t - 1][k] > 0.0;
      if (used && t % static_cast<std::size_t>(kTaus[k]) == 0) any = true;
    }
    flags[t] = any;
  }
  return flags;
}

std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& fn, std::vector<double> x,
                                double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = fn(x);
    x[i] = keep - h;
    const double down = fn(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  double hits = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) hits += 1.0;
      else if (scores[i] == scores[j]) hits += 0.5;
    }
  }
  if (pairs == 0.0) throw std::invalid_argument("pairwise_auc: need both classes");
  return hits / pairs;
}

double chi_square_uniform_pvalue(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace oracle
