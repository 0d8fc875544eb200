#pragma once

// Client allocation and purchase optimization.
//
// opt(H, Y) maximizes  sum of client utilities - purchase cost  over all
// assignments of held plus purchased goods to clients. Hotel purchases are
// priced with the price-impact model quantity_cost(p, q, c); flights and
// entertainment are priced linearly.

#include <array>
#include <optional>
#include <vector>

#include "tac/goods.hpp"
#include "tac/simplex.hpp"

namespace tac {

struct GoodPrice {
  double price = 0.0;
  double impact = 1.0;  // c >= 1; only used for hotels
  int max_units = 8;    // purchase cap
};

// Unset entries are Unavailable: the good cannot be bought.
using PriceSchedule = std::array<std::optional<GoodPrice>, kNumGoods>;

PriceSchedule unavailable_prices();

// q * p * c^max(0, q - 2)
double quantity_cost(double p, int q, double c);

// Cost of buying `q` units of `good` under `price`.
double purchase_cost(int good, const GoodPrice& price, int q);

struct AllocationResult {
  std::vector<std::optional<TravelPackage>> packages;  // one per client
  GoodVector purchases{};
  double utility = 0.0;
  double cost = 0.0;
  double objective = 0.0;  // utility - cost
  bool exact = true;       // false when the node cap was hit
  double bound_gap = 0.0;  // best remaining bound - objective when inexact
  long nodes = 0;
};

struct OptOptions {
  long node_limit = 20000;
};

// Reusable allocation program for a fixed set of clients. Holdings and prices
// may be changed between solves; the relaxation is warm-started from the
// previous basis.
class AllocationLp {
 public:
  explicit AllocationLp(std::vector<ClientPreferences> clients);

  void set_holdings(const GoodVector& h);
  void set_prices(const PriceSchedule& y);
  const GoodVector& holdings() const { return holdings_; }
  const PriceSchedule& prices() const { return prices_; }
  const std::vector<ClientPreferences>& clients() const { return clients_; }

  // Value of the continuous relaxation.
  double relaxation_value();
  // Integer optimum by branch-and-bound.
  AllocationResult solve_exact(const OptOptions& options = {});

 private:
  int x_col(int client, int package) const;
  int t_col(int client, int type, int day) const;
  void apply_price(int good);
  double tie_penalty(int good) const;
  void set_penalties(bool on);
  void rebuild();
  AllocationResult extract(const std::vector<double>& x) const;

  std::vector<ClientPreferences> clients_;
  GoodVector holdings_{};
  PriceSchedule prices_{};
  int num_x_ = 0;
  int num_t_ = 0;
  int hotel_units_ = 0;                        // unit columns per hotel good
  std::array<int, kNumGoods> purchase_col_{};  // first purchase column per good
  int goods_row_ = 0;
  std::vector<lp::Column> columns_;
  std::optional<lp::BoundedSimplex> lp_;
  std::vector<double> penalty_;  // per column, applied only inside solve_exact
  bool penalties_on_ = false;
};

AllocationResult opt(const GoodVector& holdings, const PriceSchedule& prices,
                     const std::vector<ClientPreferences>& clients, const OptOptions& options = {});

// Best total utility achievable from `goods` alone.
double v(const GoodVector& goods, const std::vector<ClientPreferences>& clients);

double lp_relaxation_value(const GoodVector& holdings, const PriceSchedule& prices,
                           const std::vector<ClientPreferences>& clients);

// Geometric-mean estimate of the impact constant from per-auction unit bids.
// Auctions with fewer than 18 bids are skipped; returns 1.0 if none qualify.
double estimate_c(const std::vector<std::vector<double>>& auctions);

// Objective of an explicit allocation, for checking solver output.
double evaluate_allocation(const std::vector<std::optional<TravelPackage>>& packages,
                           const std::vector<ClientPreferences>& clients, const GoodVector& holdings,
                           const PriceSchedule& prices, bool* feasible = nullptr);

}  // namespace tac
