#pragma once

// Brute-force allocation oracle for small instances: enumerates every
// package-and-ticket option for each of up to three clients.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "tac/allocator.hpp"

namespace tac::oracle {

struct OracleInstance {
  std::vector<ClientPreferences> clients;
  GoodVector holdings{};
  PriceSchedule prices{};
};

struct ClientOption {
  double utility = 0.0;
  std::vector<int> goods;  // each good used once
};

inline std::vector<ClientOption> client_options(const ClientPreferences& prefs, int fun_types) {
  std::vector<ClientOption> out;
  out.push_back({0.0, {}});
  for (const TravelPackage& base : base_packages()) {
    std::vector<TravelPackage> partial{base};
    for (int e = 0; e < fun_types; ++e) {
      std::vector<TravelPackage> next;
      for (const TravelPackage& p : partial) {
        next.push_back(p);
        for (int d = base.arrival; d < base.departure; ++d) {
          TravelPackage q = p;
          q.ticket_day[e] = d;
          if (q.feasible()) next.push_back(q);
        }
      }
      partial = std::move(next);
    }
    for (const TravelPackage& p : partial) {
      ClientOption o;
      o.utility = client_utility(prefs, p);
      const GoodVector u = p.usage();
      for (int g = 0; g < kNumGoods; ++g) {
        if (u[g]) o.goods.push_back(g);
      }
      out.push_back(std::move(o));
    }
  }
  return out;
}

inline double brute_force_opt(const OracleInstance& inst, int fun_types = 2) {
  constexpr double kNeg = -std::numeric_limits<double>::infinity();
  const int nc = static_cast<int>(inst.clients.size());
  std::vector<std::vector<ClientOption>> opts;
  for (const auto& c : inst.clients) opts.push_back(client_options(c, fun_types));
  // cost[g][u]: cost of using u units of good g given holdings.
  std::vector<std::vector<double>> cost(kNumGoods, std::vector<double>(nc + 1, 0.0));
  for (int g = 0; g < kNumGoods; ++g) {
    for (int u = 0; u <= nc; ++u) {
      const int q = std::max(0, u - inst.holdings[g]);
      if (q == 0) continue;
      const auto& y = inst.prices[g];
      cost[g][u] = (!y || q > y->max_units) ? kNeg : -purchase_cost(g, *y, q);
    }
  }
  double best = 0.0;
  std::vector<int> used(kNumGoods, 0);
  auto total_cost = [&] {
    double s = 0.0;
    for (int g = 0; g < kNumGoods; ++g) s += cost[g][used[g]];
    return s;
  };
  auto add = [&](const ClientOption& o, int sign) {
    for (int g : o.goods) used[g] += sign;
  };
  auto last_level = [&](double util) {
    const auto& last = opts[nc - 1];
    const double base = total_cost();
    if (base == kNeg) return;  // usage only grows
    for (const ClientOption& o : last) {
      double delta = 0.0;
      for (int g : o.goods) delta += cost[g][used[g] + 1] - cost[g][used[g]];
      const double val = util + o.utility + base + delta;
      if (val > best) best = val;
    }
  };
  if (nc == 0) return 0.0;
  if (nc == 1) {
    last_level(0.0);
  } else if (nc == 2) {
    for (const auto& a : opts[0]) {
      add(a, 1);
      last_level(a.utility);
      add(a, -1);
    }
  } else {
    for (const auto& a : opts[0]) {
      add(a, 1);
      for (const auto& b : opts[1]) {
        add(b, 1);
        last_level(a.utility + b.utility);
        add(b, -1);
      }
      add(a, -1);
    }
  }
  return best;
}

inline OracleInstance random_oracle_instance(std::mt19937_64& rng) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  OracleInstance inst;
  const int nc = uni(1, 3);
  for (int c = 0; c < nc; ++c) {
    ClientPreferences p;
    p.arrival = uni(1, 4);
    p.departure = uni(p.arrival + 1, 5);
    p.hotel_premium = uni(50, 150);
    p.fun = {uni(0, 200), uni(0, 200), 0};
    inst.clients.push_back(p);
  }
  static constexpr double kImpacts[] = {1.0, 1.35, 2.0};
  for (int g = 0; g < kNumGoods; ++g) {
    const bool third_fun = is_fun(g) && fun_type_of(g) == 2;
    if (!third_fun && uni(0, 3) == 0) inst.holdings[g] = uni(1, 2);
    if (third_fun || uni(0, 9) < 3) continue;
    GoodPrice y;
    y.price = uni(50, 500);
    y.impact = is_hotel(g) ? kImpacts[uni(0, 2)] : 1.0;
    y.max_units = uni(1, 3);
    inst.prices[g] = y;
  }
  return inst;
}

}  // namespace tac::oracle
