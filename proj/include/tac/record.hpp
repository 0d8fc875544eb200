#pragma once

// Game records: JSON Lines event logs, compact per-game summaries used for
// training, market snapshots at decision points, and replay verification.
//
// A record file starts with a header line
//   {"format":"tac-game","version":1,"seed":...,"agents":[...],...}
// followed by one event per line in sequence order.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tac/market.hpp"

namespace tac {

inline constexpr int kRecordVersion = 1;

struct GameRecord {
  nlohmann::json header;
  std::vector<nlohmann::json> events;
};

nlohmann::json make_header(const Market& market, const std::vector<std::string>& agent_names,
                           std::uint64_t game_index = 0, int model_version = 0);

void write_record(std::ostream& out, const GameRecord& record);
void write_record_file(const std::string& path, const GameRecord& record);
GameRecord read_record(std::istream& in);
GameRecord read_record_file(const std::string& path);

MarketConfig config_from_header(const nlohmann::json& header);

struct Quote {
  int t = 0;
  double ask = 0.0;
};

// Everything the predictors need from one game.
struct GameSummary {
  std::uint64_t seed = 0;
  int num_agents = 0;
  std::array<double, kNumFlights> flight_y{};
  std::array<std::vector<Quote>, kNumFlights> flight_quotes;
  std::array<std::vector<Quote>, kNumHotels> hotel_quotes;  // indexed by room
  std::array<int, kNumHotels> close_minute{};
  std::array<double, kNumHotels> close_price{};
  std::array<bool, kNumHotels> closed{};
  std::vector<AgentScore> scores;

  bool complete() const;
};

// Throws std::invalid_argument on malformed events.
GameSummary summarize(const std::vector<nlohmann::json>& events);

// Public market state at the decision point of minute k (1-based).
struct MarketSnapshot {
  int minute = 1;
  std::array<double, kNumFlights> flight_ask{};
  std::array<double, kNumHotels> hotel_ask{};
  std::array<bool, kNumHotels> closed{};
  std::array<double, kNumHotels> close_price{};
  std::array<int, kNumHotels> close_minute{};  // 0 while open
  int num_players = 0;
  std::array<double, kMaxAgents> participation{};

  friend bool operator==(const MarketSnapshot&, const MarketSnapshot&) = default;
};

MarketSnapshot snapshot(const Market& market, int minute);
MarketSnapshot snapshot_at(const GameSummary& game, int minute);

struct ReplayVerdict {
  bool ok = false;
  std::size_t events_checked = 0;
  std::optional<std::size_t> first_mismatch;  // index into the event list
  std::string expected;                       // recorded line at the mismatch
  std::string actual;                         // regenerated line
  std::string message;
};

// Re-simulates the game from the header seed and the logged agent actions and
// compares the regenerated event stream line by line.
ReplayVerdict replay(const GameRecord& record);

}  // namespace tac
