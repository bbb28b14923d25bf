#pragma once

#include <complex>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mshedge/heston_sim.hpp"

namespace mshedge {

/// European call contract. Time is measured in trading days.
struct CallSpec {
  double strike = 100.0 / 1.1;
  int maturity_day = 30;
  double r = 0.0;  // risk-free rate per trading day
  double moneyness0 = 1.1;

  /// Contract whose strike puts spot s0 at moneyness s0/strike.
  static CallSpec at_moneyness(double s0, double moneyness, int maturity_day = 30, double r = 0.0);
  void validate() const;
};

enum class SeriesSource { kSynthetic, kReal };

/// Aligned daily stock and call prices, days 0..maturity_day.
struct MarketSeries {
  std::vector<double> s;
  std::vector<double> c;
  CallSpec spec;
  SeriesSource source = SeriesSource::kSynthetic;

  std::size_t size() const { return s.size(); }
  int horizon() const { return static_cast<int>(s.size()) - 1; }
  /// Throws InputError on length mismatch, negative prices or (synthetic
  /// only) a terminal price that is not the intrinsic value.
  void validate() const;
};

/// E[exp(i u ln S_T)] under the risk-neutral measure, with S = s and V = v
/// now and tau trading days to go. Uses the formulation whose complex log
/// stays on the principal branch, rewritten so that no term divides by
/// eta^2 (stable as eta -> 0).
std::complex<double> heston_cf(std::complex<double> u, const HestonParams& params, double s, double v,
                               double tau, double r);

/// Price and hedge ratio from one pass of the quadrature.
struct HestonQuote {
  double price = 0.0;
  double delta = 0.0;
  int nodes = 0;  // integrand evaluations used
};

/// Call value s*P1 - K*exp(-r*tau)*P2 with P1, P2 by Gil-Pelaez inversion on
/// adaptive Gauss-Legendre panels. tau == 0 gives intrinsic value and the
/// exercise indicator. Throws NumericalError if the integrand fails to decay.
HestonQuote heston_quote(const HestonParams& params, double s, double v, const CallSpec& spec, double tau);

double heston_call_price(const HestonParams& params, double s, double v, const CallSpec& spec, double tau);

/// P1, i.e. dC/dS. At tau == 0: 1 above the strike, 0 below, 0.5 at it.
double heston_delta(const HestonParams& params, double s, double v, const CallSpec& spec, double tau);

/// Black-Scholes call; sigma is per sqrt(trading day), tau in days.
double bs_call_price(double s, double strike, double sigma, double tau, double r);

/// Prices the call along one simulated path: c[t] is the Heston price with
/// maturity_day - t days left, c[maturity_day] the intrinsic value.
MarketSeries price_path(std::span<const double> s, std::span<const double> v, const HestonParams& params,
                        const CallSpec& spec);

/// Heston deltas along a path (day t uses s[t], v[t]); the last entry is the
/// exercise indicator.
std::vector<double> path_deltas(std::span<const double> s, std::span<const double> v,
                                const HestonParams& params, const CallSpec& spec);

/// Prices and deltas together (one quadrature per day).
struct PricedPath {
  MarketSeries series;
  std::vector<double> delta;
};
PricedPath price_path_with_deltas(std::span<const double> s, std::span<const double> v,
                                  const HestonParams& params, const CallSpec& spec);

/// MarketSeries CSV: columns day, s, c. The JSON sidecar carries CallSpec
/// and the source tag.
std::string series_to_csv(const MarketSeries& series);
std::string series_sidecar_json(const MarketSeries& series);
void write_series(const MarketSeries& series, const std::filesystem::path& csv_path);
MarketSeries read_series(const std::filesystem::path& csv_path);

}  // namespace mshedge
