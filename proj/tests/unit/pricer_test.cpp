#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "mshedge/errors.hpp"
#include "mshedge/pricer.hpp"
#include "oracles.hpp"

using namespace mshedge;

namespace {

HestonParams generic() {
  HestonParams p;
  p.a = 0.04;
  p.v_bar = 1.6e-4;
  p.eta = 1.2e-3;
  p.rho = -0.55;
  p.v0 = 2.2e-4;
  return p;
}

// eta -> 0 with v0 = v_bar: constant variance, i.e. Black-Scholes.
HestonParams bs_limit(double var) {
  HestonParams p;
  p.a = 0.05;
  p.v_bar = var;
  p.v0 = var;
  p.eta = 1e-12;
  p.rho = -0.5;
  return p;
}

CallSpec strike_at(double k, double r = 0.0) {
  CallSpec spec;
  spec.strike = k;
  spec.r = r;
  return spec;
}

}  // namespace

TEST(HestonCf, UnitAtZero) {
  const std::complex<double> z = heston_cf({0.0, 0.0}, generic(), 100.0, 2e-4, 20.0, 1e-4);
  EXPECT_EQ(z.real(), 1.0);
  EXPECT_EQ(z.imag(), 0.0);
}

TEST(HestonCf, MinusIGivesForward) {
  const double s = 97.0, r = 2e-4, tau = 25.0;
  const std::complex<double> z = heston_cf({0.0, -1.0}, generic(), s, 1.5e-4, tau, r);
  const double fwd = s * std::exp(r * tau);
  EXPECT_NEAR(z.real(), fwd, 1e-12 * fwd);
  EXPECT_NEAR(z.imag(), 0.0, 1e-12 * fwd);
}

TEST(HestonCf, MatchesLognormalInConstantVarianceLimit) {
  const double var = 1.5e-4, s = 104.0, tau = 17.0, r = 1e-4;
  for (std::complex<double> u : {std::complex<double>(1.3, 0.0), {7.5, 0.0}, {0.4, -1.0}}) {
    const auto got = heston_cf(u, bs_limit(var), s, var, tau, r);
    const auto want = oracle::lognormal_cf(u, s, var, tau, r);
    EXPECT_LT(std::abs(got - want), 1e-8 * std::abs(want)) << u;
  }
}

TEST(HestonCf, StableForTinyEta) {
  HestonParams p = generic();
  p.eta = 1e-14;
  const auto z = heston_cf({2.0, 0.0}, p, 100.0, 2e-4, 30.0, 0.0);
  EXPECT_TRUE(std::isfinite(z.real()) && std::isfinite(z.imag()));
  EXPECT_LE(std::abs(z), 1.0 + 1e-12);
}

TEST(HestonCf, NonFiniteInputIsNumericalError) {
  HestonParams p = generic();
  p.a = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(heston_cf({1.0, 0.0}, p, 100.0, 1e-4, 10.0, 0.0), NumericalError);
  EXPECT_THROW(heston_cf({1.0, 0.0}, generic(), 100.0, 1e-4, 0.0, 0.0), InputError);
}

TEST(HestonPrice, IntrinsicAtExpiry) {
  const HestonQuote q = heston_quote(generic(), 110.0, 1e-4, strike_at(100.0), 0.0);
  EXPECT_EQ(q.price, 10.0);
  EXPECT_EQ(q.delta, 1.0);
  EXPECT_EQ(heston_delta(generic(), 90.0, 1e-4, strike_at(100.0), 0.0), 0.0);
  EXPECT_EQ(heston_delta(generic(), 100.0, 1e-4, strike_at(100.0), 0.0), 0.5);
}

TEST(HestonPrice, BlackScholesLimit) {
  const double var = 0.04 / 252.0;
  for (double k : {90.0, 100.0, 105.0}) {
    for (double tau : {5.0, 20.0, 30.0}) {
      const double got = heston_call_price(bs_limit(var), 100.0, var, strike_at(k), tau);
      const double want = oracle::bs_call_erf(100.0, k, std::sqrt(var), tau, 0.0);
      EXPECT_LE(std::abs(got - want), 1e-4 * want) << "K=" << k << " tau=" << tau;
    }
  }
}

TEST(HestonPrice, BlackScholesLimitWithRate) {
  const double var = 1e-4, r = 3e-4;
  const double got = heston_call_price(bs_limit(var), 100.0, var, strike_at(98.0, r), 30.0);
  const double want = oracle::bs_call_erf(100.0, 98.0, 1e-2, 30.0, r);
  EXPECT_LE(std::abs(got - want), 1e-4 * want);
}

TEST(HestonPrice, AgreesWithMonteCarlo) {
  const HestonParams p = generic();
  const double s = 100.0, k = 98.0, tau = 15.0;
  const double price = heston_call_price(p, s, p.v0, strike_at(k), tau);
  const auto mc = oracle::mc_heston_call(p.a, p.v_bar, p.eta, p.rho, s, p.v0, k, tau, 0.0, 200000, 4, 2024);
  EXPECT_LE(std::abs(price - mc.mean), 3.0 * mc.std_error) << price << " vs " << mc.mean << " +- " << mc.std_error;
}

TEST(HestonDelta, DeepInTheMoney) {
  EXPECT_GE(heston_delta(generic(), 1000.0, 2e-4, strike_at(1.0), 1.0), 0.999);
}

TEST(HestonDelta, WithinBoundsAndMatchesBumpReprice) {
  const HestonParams p = generic();
  for (double s : {80.0, 95.0, 100.0, 103.0, 120.0}) {
    for (double tau : {1.0, 10.0, 30.0}) {
      const CallSpec spec = strike_at(100.0);
      const double d = heston_delta(p, s, p.v0, spec, tau);
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, 1.0);
      const double h = 1e-3 * s;
      const double fd = (heston_call_price(p, s + h, p.v0, spec, tau) - heston_call_price(p, s - h, p.v0, spec, tau)) / (2 * h);
      EXPECT_NEAR(d, fd, 1e-4) << "s=" << s << " tau=" << tau;
    }
  }
}

TEST(HestonPrice, IncreasingInSpotAndInsideNoArbitrageBounds) {
  const HestonParams p = generic();
  const CallSpec spec = strike_at(100.0, 1e-4);
  for (double tau : {2.0, 12.0, 30.0}) {
    double prev = -1.0;
    for (double s = 80.0; s <= 120.0; s += 2.5) {
      const double c = heston_call_price(p, s, p.v0, spec, tau);
      // far OTM the price is quadrature noise around zero
      if (c > 1e-8) {
        EXPECT_GT(c, prev);
      } else {
        EXPECT_GE(c, prev - 1e-10);
      }
      EXPECT_GE(c, std::max(s - spec.strike * std::exp(-spec.r * tau), 0.0));
      EXPECT_LE(c, s);
      prev = c;
    }
  }
}

TEST(HestonPrice, TinyStrikeApproachesForwardIntrinsic) {
  const HestonParams p = generic();
  const double s = 100.0, k = 1e-6, r = 2e-4, tau = 20.0;
  const double c = heston_call_price(p, s, p.v0, strike_at(k, r), tau);
  EXPECT_NEAR(c, s - k * std::exp(-r * tau), 1e-6 * s);
}

TEST(BlackScholes, Limits) {
  EXPECT_DOUBLE_EQ(bs_call_price(100.0, 95.0, 0.0, 10.0, 1e-3), 100.0 - 95.0 * std::exp(-1e-2));
  EXPECT_EQ(bs_call_price(100.0, 105.0, 0.0, 10.0, 0.0), 0.0);
  EXPECT_EQ(bs_call_price(112.0, 100.0, 0.01, 0.0, 0.0), 12.0);
}

TEST(BlackScholes, AtTheMoneyTwentyPercentTotalVol) {
  const double sigma = 0.2 / std::sqrt(25.0);
  const double got = bs_call_price(100.0, 100.0, sigma, 25.0, 0.0);
  EXPECT_NEAR(got, oracle::bs_call_erf(100.0, 100.0, sigma, 25.0, 0.0), 1e-12);
  EXPECT_NEAR(got, 7.97, 0.01);
}

TEST(PricePath, TerminalIntrinsicAndInTheMoneyStart) {
  const auto lp = fixture::seeded_path(3);
  const MarketSeries& m = lp.priced.series;
  ASSERT_EQ(m.size(), 31u);
  EXPECT_EQ(m.c[30], std::max(m.s[30] - m.spec.strike, 0.0));
  EXPECT_GE(m.c[0], m.s[0] - m.spec.strike);
  EXPECT_NEAR(m.spec.strike, m.s[0] / 1.1, 1e-12);
  EXPECT_NO_THROW(m.validate());
}

TEST(PricePath, DeltasMatchPointwisePricer) {
  const auto lp = fixture::seeded_path(8);
  const auto d = path_deltas(lp.priced.series.s, lp.v, lp.params, lp.priced.series.spec);
  EXPECT_EQ(d, lp.priced.delta);
  const auto only = price_path(lp.priced.series.s, lp.v, lp.params, lp.priced.series.spec);
  EXPECT_EQ(only.c, lp.priced.series.c);
}

TEST(PricePath, EveryDayAgreesWithMonteCarloRepricing) {
  const auto lp = fixture::seeded_path(5);
  const MarketSeries& m = lp.priced.series;
  const HestonParams& p = lp.params;
  for (int t = 0; t < 30; ++t) {
    const auto mc = oracle::mc_heston_call(p.a, p.v_bar, p.eta, p.rho, m.s[t], lp.v[t], m.spec.strike, 30.0 - t,
                                           m.spec.r, 20000, 2, 1000u + static_cast<unsigned>(t));
    EXPECT_LE(std::abs(m.c[t] - mc.mean), 3.0 * mc.std_error + 1e-12) << "day " << t;
  }
}

TEST(PricePath, LengthMismatchIsInputError) {
  const std::vector<double> s(31, 100.0), v(30, 1e-4);
  EXPECT_THROW(price_path(s, v, generic(), CallSpec{}), InputError);
}

TEST(SeriesIo, CsvRoundTrip) {
  const auto lp = fixture::seeded_path(2);
  const auto dir = fixture::temp_dir("series_io");
  write_series(lp.priced.series, dir / "series.csv");
  const MarketSeries back = read_series(dir / "series.csv");
  EXPECT_EQ(back.s, lp.priced.series.s);
  EXPECT_EQ(back.c, lp.priced.series.c);
  EXPECT_EQ(back.spec.strike, lp.priced.series.spec.strike);
  EXPECT_EQ(back.source, SeriesSource::kSynthetic);
}
