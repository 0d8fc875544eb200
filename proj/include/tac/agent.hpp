#pragma once

// Bidding agents. Agents act synchronously at the decision point of each game
// minute k = 1..12 (second 60(k-1)+1) through the market's public interface.

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tac/allocator.hpp"
#include "tac/market.hpp"
#include "tac/predictors.hpp"

namespace tac {

struct AgentConfig {
  PredictorVariant predictor = PredictorVariant::kLearnedEv;
  int flight_lookahead = 2;  // minutes
  int hotel_samples = 16;    // per decision point, split over open hotels
  int flight_samples = 8;
  int entertainment_samples = 8;
  int max_units = 8;
  double margin_start = 40.0;
  double margin_end = 5.0;
  bool price_impact = true;
  // Impact constants by early (close minute <= 7) or late close and cheap
  // (Shoreline Shanties) or expensive (Tampa Towers) hotel.
  double c_early_cheap = 1.35;
  double c_early_expensive = 1.35;
  double c_late_cheap = 1.35;
  double c_late_expensive = 1.35;
  int expected_price_orders = 4;  // closing orders averaged for expected prices
  bool entertainment_trading = true;  // EarlyBidder only

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
  double impact(int room, int close_minute) const;
};

// Linear margin from margin_start at t = 0 to margin_end at game end.
double entertainment_margin(const AgentConfig& config, int t);

// Counts of runtime property checks and violations.
struct InvariantMonitor {
  long hotel_checks = 0;
  long hotel_monotone_violations = 0;
  long hotel_diminishing_violations = 0;
  long flight_checks = 0;
  long flight_violations = 0;
  long entertainment_checks = 0;
  long entertainment_violations = 0;
  long prediction_checks = 0;
  long prediction_floor_violations = 0;
  long lp_failures = 0;

  long violations() const {
    return hotel_monotone_violations + hotel_diminishing_violations + flight_violations + entertainment_violations +
           prediction_floor_violations;
  }
  void merge(const InvariantMonitor& o);
};

class TradingAgent {
 public:
  virtual ~TradingAgent() = default;
  virtual void act(Market& market, int minute) = 0;
  virtual std::string name() const = 0;
};

// One joint draw of hotel closing order and closing prices.
struct Scenario {
  CloseMinutes close{};
  std::array<double, kNumHotels> hotel_price{};  // closed rooms: close price
};

// Per-scenario values V_0..V_n and their averaged differences.
struct MarginalValues {
  std::vector<std::vector<double>> values;  // [scenario][i]
  std::vector<double> marginal;             // mean of V_i - V_{i-1}, i = 1..n
};

// Hotel unit bids from marginal values: one unit per value >= ask + 1, in
// nonincreasing order.
std::vector<double> hotel_bid_units(const std::vector<double>& marginal, double ask);

// Mean over scenarios of V_won - won * y_s, where won counts bids >= y_s.
double bid_set_value(const std::vector<double>& bids, const MarginalValues& mv, const std::vector<double>& y);

// true iff the candidate bid set is strictly better than the existing one.
bool maybe_replace_bid(const std::vector<double>& existing, const std::vector<double>& candidate,
                       const MarginalValues& mv, const std::vector<double>& y);

// Number of scenarios for each of `hotels` hotels out of `budget`.
std::vector<int> partition_budget(int budget, int hotels);

class AdaptiveAgent : public TradingAgent {
 public:
  AdaptiveAgent(int index, std::uint64_t seed, AgentConfig config, std::shared_ptr<const PredictorResources> res,
                InvariantMonitor* monitor = nullptr, std::string name = "adaptive");

  void act(Market& market, int minute) override;
  std::string name() const override { return name_; }
  const AgentConfig& config() const { return config_; }

  // Individual steps, public for tests.
  AllocationResult compute_gstar(const Market& market, const MarketSnapshot& s);
  void flight_step(Market& market, const MarketSnapshot& s, const AllocationResult& gstar, bool last_minute);
  void hotel_step(Market& market, const MarketSnapshot& s);
  void entertainment_step(Market& market, const MarketSnapshot& s);

  // Mean predicted ask increase over the next 1..L minutes.
  double postponement_cost(int flight, int t) const;
  // Benefit of waiting for copies 1..n of a flight.
  std::vector<double> postponement_benefit(const Market& market, const MarketSnapshot& s, int flight, int n,
                                           const std::vector<Scenario>& scenarios);
  MarginalValues hotel_marginal_values(const Market& market, const MarketSnapshot& s, int room,
                                       const std::vector<Scenario>& scenarios);

  Scenario sample_scenario(const MarketSnapshot& s);
  std::array<double, kNumHotels> expected_prices(const MarketSnapshot& s);
  std::vector<int> last_hotel_samples() const { return last_hotel_samples_; }

 private:
  void load_clients(const Market& market);
  PriceSchedule scenario_prices(const MarketSnapshot& s, const Scenario& sc) const;
  GoodVector scenario_holdings(const Market& market, const Scenario& sc, int exclude_room) const;
  double lp_value(const GoodVector& h, const PriceSchedule& y);
  void check_floor(double value, double floor);

  int index_;
  std::mt19937_64 rng_;
  AgentConfig config_;
  std::shared_ptr<const PredictorResources> res_;
  InvariantMonitor* monitor_;
  InvariantMonitor own_monitor_;
  std::string name_;
  std::unique_ptr<AllocationLp> lp_;
  std::array<Quote, kNumFlights> first_quote_{};
  std::array<Quote, kNumFlights> latest_quote_{};
  bool seen_quotes_ = false;
  std::vector<int> last_hotel_samples_;
};

// Commits after the first flight quotes: buys the flights of G* and bids
// $1001 for each hotel unit in G*, never revising either. Entertainment is
// untouched unless enable_entertainment() is called, after which tickets are
// traded every minute as the adaptive agent does, with simple_ev prices.
class EarlyBidder : public TradingAgent {
 public:
  EarlyBidder(int index, std::shared_ptr<const PredictorResources> res, std::string name = "early_bidder",
              bool price_impact = true);

  void enable_entertainment(std::uint64_t seed, AgentConfig config, InvariantMonitor* monitor = nullptr);

  void act(Market& market, int minute) override;
  std::string name() const override { return name_; }
  // Flight and hotel decisions made.
  int actions_taken() const { return actions_; }

 private:
  int index_;
  std::shared_ptr<const PredictorResources> res_;
  std::string name_;
  bool price_impact_;
  void commit(Market& market, int minute);

  int actions_ = 0;
  std::unique_ptr<AdaptiveAgent> tickets_;
};

}  // namespace tac
