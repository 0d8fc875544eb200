#pragma once

#include <vector>

#include "tac/harness.hpp"

namespace tac::testing {

// Small scenario budgets so that whole games run quickly in unit tests.
inline AgentSpec fast_agent(PredictorVariant v, const std::string& name = "") {
  AgentSpec a;
  a.name = name.empty() ? to_string(v) : name;
  a.config.predictor = v;
  a.config.hotel_samples = 4;
  a.config.flight_samples = 2;
  a.config.entertainment_samples = 2;
  a.config.expected_price_orders = 1;
  return a;
}

inline std::vector<AgentSpec> fast_roster(int n, PredictorVariant v = PredictorVariant::kCurrentBid) {
  std::vector<AgentSpec> r;
  for (int i = 0; i < n; ++i) r.push_back(fast_agent(v, to_string(v) + "_" + std::to_string(i)));
  return r;
}

inline std::shared_ptr<const PredictorResources> empty_resources() {
  return std::make_shared<const PredictorResources>();
}

}  // namespace tac::testing
