#pragma once

// Internal: nlohmann/json conversions for the public value types. Kept out
// of the installed headers so consumers do not need the vendored library.

#include <json.hpp>

#include "mshedge/heston_sim.hpp"
#include "mshedge/hedge_engine.hpp"
#include "mshedge/pricer.hpp"

namespace mshedge {

using Json = nlohmann::ordered_json;

inline Json params_to_json(const HestonParams& p) {
  return Json{{"mu", p.mu}, {"a", p.a},     {"v_bar", p.v_bar}, {"eta", p.eta},
              {"rho", p.rho}, {"s0", p.s0}, {"v0", p.v0}};
}

inline HestonParams params_from_json(const Json& j) {
  HestonParams p;
  p.mu = j.at("mu").get<double>();
  p.a = j.at("a").get<double>();
  p.v_bar = j.at("v_bar").get<double>();
  p.eta = j.at("eta").get<double>();
  p.rho = j.at("rho").get<double>();
  p.s0 = j.at("s0").get<double>();
  p.v0 = j.at("v0").get<double>();
  return p;
}

inline Json spec_to_json(const CallSpec& s) {
  return Json{{"strike", s.strike},
              {"maturity_day", s.maturity_day},
              {"r", s.r},
              {"moneyness0", s.moneyness0}};
}

inline CallSpec spec_from_json(const Json& j) {
  CallSpec s;
  s.strike = j.at("strike").get<double>();
  s.maturity_day = j.at("maturity_day").get<int>();
  s.r = j.at("r").get<double>();
  s.moneyness0 = j.at("moneyness0").get<double>();
  return s;
}

inline Json ranges_to_json(const ParamRanges& r) {
  auto iv = [](const Interval& i) { return Json::array({i.lo, i.hi}); };
  return Json{{"mu", iv(r.mu)},   {"a", iv(r.a)},   {"v_bar", iv(r.v_bar)}, {"eta", iv(r.eta)},
              {"rho", iv(r.rho)}, {"s0", iv(r.s0)}, {"v0", iv(r.v0)}};
}

inline Json hedge_to_json(const HedgeConfig& h) {
  return Json{{"f", h.f},
              {"gamma", h.gamma},
              {"r", h.r},
              {"cost_price_timing", h.cost_price_timing == CostPriceTiming::kPrevious ? "previous" : "current"}};
}

}  // namespace mshedge
