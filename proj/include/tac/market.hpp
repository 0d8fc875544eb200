#pragma once

// Simulated travel market: 8 flight auctions with drifting asks, 8 hotel
// auctions (16th-price ascending, one closing at each of minutes 4..11) and
// 12 entertainment continuous double auctions.
//
// Time is integer seconds 0..720. Every state change is appended to an event
// log; the log plus the game seed is enough to replay a game.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "tac/goods.hpp"

namespace tac {

struct MarketConfig {
  double flight_initial_min = 250.0;
  double flight_initial_max = 400.0;
  double flight_min = 150.0;
  double flight_max = 800.0;
  double hotel_price_floor = 1.0;
};

enum class Side { kBuy, kSell };

const char* to_string(Side s);

struct ActionResult {
  bool accepted = false;
  std::string reason;  // rejection code when !accepted
  int filled = 0;      // units traded immediately
  double paid = 0.0;   // total cash moved by this action (positive = spent)
};

struct EntOrder {
  int agent = 0;
  double price = 0.0;
  int qty = 0;
  long seq = 0;
};

struct AgentScore {
  double utility = 0.0;
  double expenditure = 0.0;
  double score = 0.0;
};

// Minute at which decisions for game minute k (1-based) are made.
constexpr int decision_time(int minute) { return 60 * (minute - 1) + 1; }

class Market {
 public:
  Market(std::uint64_t seed, int num_agents, MarketConfig config = {});

  int num_agents() const { return num_agents_; }
  std::uint64_t seed() const { return seed_; }
  const MarketConfig& config() const { return config_; }
  int time() const { return time_; }
  bool over() const { return time_ >= kGameSeconds; }

  // Processes all scheduled events up to and including second t. At a given
  // second: flight ticks, then (on the minute) hotel asks, then the hotel close.
  void advance_to(int t);

  // Agent-visible state.
  const std::vector<ClientPreferences>& clients(int agent) const { return agents_.at(agent).clients; }
  const GoodVector& holdings(int agent) const { return agents_.at(agent).holdings; }
  double expenditure(int agent) const { return agents_.at(agent).expenditure; }
  double flight_ask(int good) const;
  double hotel_ask(int good) const;
  bool hotel_closed(int good) const;
  std::optional<double> hotel_close_price(int good) const;
  int hotel_close_minute(int good) const;  // 0 while open
  std::vector<double> hotel_bids(int agent, int good) const;
  int hotel_units_winning(int agent, int good) const;
  std::optional<double> ent_best_bid(int good) const;
  std::optional<double> ent_best_ask(int good) const;
  std::vector<EntOrder> ent_orders(int agent, int good, Side side) const;

  // Hidden parameters, for logging and tests.
  double flight_hidden_y(int good) const;
  int scheduled_close_minute(int room) const { return close_minute_.at(room); }

  ActionResult buy_flight(int agent, int good, double price, int qty);
  ActionResult bid_hotel(int agent, int good, std::vector<double> units);
  ActionResult order_entertainment(int agent, int good, Side side, double price, int qty);
  void withdraw_entertainment(int agent, int good, Side side);

  // Computes and logs final scores; the game must be over.
  std::vector<AgentScore> final_scores();

  const std::vector<nlohmann::json>& events() const { return events_; }

  // Closes whose price differed from an independent 16th-highest computation.
  int clearing_violations() const { return clearing_violations_; }

 private:
  struct Flight {
    double y = 10.0;
    double ask = 0.0;
    int next_tick = 0;
    std::mt19937_64 rng;
  };
  struct HotelUnit {
    int agent;
    double price;
    long seq;
  };
  struct Hotel {
    std::vector<HotelUnit> units;
    double ask = 0.0;
    bool closed = false;
    double close_price = 0.0;
    int close_minute = 0;
  };
  struct Book {
    std::vector<EntOrder> bids;
    std::vector<EntOrder> asks;
  };
  struct AgentState {
    std::vector<ClientPreferences> clients;
    GoodVector holdings{};
    double expenditure = 0.0;
  };

  void log(nlohmann::json event);
  void check_agent(int agent) const;
  void tick_flight(int good);
  void update_hotel_asks();
  void close_hotel(int room);
  void log_ent_quote(int good);
  static double sixteenth_price(const std::vector<HotelUnit>& units);
  static int units_won(std::vector<HotelUnit> units, int agent);

  std::uint64_t seed_;
  int num_agents_;
  MarketConfig config_;
  int time_ = 0;
  long seq_ = 0;        // event sequence
  long unit_seq_ = 0;   // hotel unit / order arrival sequence
  std::vector<AgentState> agents_;
  std::array<Flight, kNumFlights> flights_;
  std::array<Hotel, kNumHotels> hotels_;
  std::array<int, kNumHotels> close_minute_{};
  std::array<Book, kNumEntertainment> books_;
  std::vector<nlohmann::json> events_;
  int clearing_violations_ = 0;
};

}  // namespace tac
