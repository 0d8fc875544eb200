#pragma once

// Goods, client preferences and travel packages of the travel-agent game.
//
// The 28 goods are laid out as
//   0..3    inflights, arrival days 1..4
//   4..7    outflights, departure days 2..5
//   8..11   Tampa Towers, nights 1..4
//   12..15  Shoreline Shanties, nights 1..4
//   16..27  entertainment, type-major (AW, AP, MU) x days 1..4

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tac {

inline constexpr int kNumGoods = 28;
inline constexpr int kNumFlights = 8;
inline constexpr int kNumHotels = 8;
inline constexpr int kNumEntertainment = 12;
inline constexpr int kNumEntertainmentTypes = 3;
inline constexpr int kClientsPerAgent = 8;
inline constexpr int kRoomsPerHotel = 16;
inline constexpr int kMaxAgents = 8;
inline constexpr int kGameSeconds = 720;
inline constexpr int kGameMinutes = 12;

enum class HotelType : int { kTampaTowers = 0, kShorelineShanties = 1 };
enum class FunType : int { kAlligatorWrestling = 0, kAmusementPark = 1, kMuseum = 2 };
enum class GoodKind { kInFlight, kOutFlight, kHotel, kEntertainment };

constexpr int in_flight(int day) { return day - 1; }
constexpr int out_flight(int day) { return 4 + day - 2; }
constexpr int hotel_good(HotelType type, int night) {
  return 8 + 4 * static_cast<int>(type) + night - 1;
}
constexpr int fun_good(FunType type, int day) {
  return 16 + 4 * static_cast<int>(type) + day - 1;
}
constexpr int fun_good(int type, int day) { return 16 + 4 * type + day - 1; }

// Hotel goods are also addressed by a dense room index 0..7 (TT1..TT4, SS1..SS4).
constexpr int room_to_good(int room) { return 8 + room; }
constexpr int good_to_room(int good) { return good - 8; }
constexpr HotelType room_type(int room) {
  return room < 4 ? HotelType::kTampaTowers : HotelType::kShorelineShanties;
}
constexpr int room_night(int room) { return room % 4 + 1; }

GoodKind kind_of(int good);
bool is_flight(int good);
bool is_hotel(int good);
bool is_fun(int good);
// Day attached to a good: arrival/departure day for flights, night for
// hotels, event day for entertainment.
int day_of(int good);
// Entertainment type index 0..2 (only for entertainment goods).
int fun_type_of(int good);

std::string good_name(int good);
std::optional<int> parse_good(std::string_view name);

using GoodVector = std::array<int, kNumGoods>;

inline GoodVector zero_goods() { return GoodVector{}; }
GoodVector operator+(const GoodVector& a, const GoodVector& b);
int total_units(const GoodVector& g);

struct ClientPreferences {
  int arrival = 1;    // ideal arrival day, 1..4
  int departure = 2;  // ideal departure day, 2..5
  int hotel_premium = 50;
  std::array<int, kNumEntertainmentTypes> fun{};  // AW, AP, MU values

  bool valid() const;
  friend bool operator==(const ClientPreferences&, const ClientPreferences&) = default;
};

// A travel package with optional entertainment. ticket_day[t] == 0 means no
// ticket of type t is assigned.
struct TravelPackage {
  int arrival = 1;
  int departure = 2;
  HotelType hotel = HotelType::kShorelineShanties;
  std::array<int, kNumEntertainmentTypes> ticket_day{};

  // Arrival before departure, days in range, tickets inside the stay, at
  // most one ticket per day.
  bool feasible() const;
  GoodVector usage() const;
  friend bool operator==(const TravelPackage&, const TravelPackage&) = default;
};

// 1000 - travel penalty + hotel bonus + fun bonus; no package is worth 0.
double client_utility(const ClientPreferences& prefs, const std::optional<TravelPackage>& pkg);

// The 20 ticketless (arrival, departure, hotel) packages in a fixed order.
const std::vector<TravelPackage>& base_packages();

}  // namespace tac
