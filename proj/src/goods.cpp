#include "tac/goods.hpp"

#include <cstdlib>
#include <stdexcept>

namespace tac {

GoodKind kind_of(int good) {
  if (good < 0 || good >= kNumGoods) throw std::out_of_range("good index");
  if (good < 4) return GoodKind::kInFlight;
  if (good < 8) return GoodKind::kOutFlight;
  if (good < 16) return GoodKind::kHotel;
  return GoodKind::kEntertainment;
}

bool is_flight(int good) { return good >= 0 && good < 8; }
bool is_hotel(int good) { return good >= 8 && good < 16; }
bool is_fun(int good) { return good >= 16 && good < kNumGoods; }

int day_of(int good) {
  switch (kind_of(good)) {
    case GoodKind::kInFlight:
      return good + 1;
    case GoodKind::kOutFlight:
      return good - 4 + 2;
    case GoodKind::kHotel:
      return (good - 8) % 4 + 1;
    case GoodKind::kEntertainment:
      return (good - 16) % 4 + 1;
  }
  return 0;
}

int fun_type_of(int good) {
  if (!is_fun(good)) throw std::invalid_argument("not an entertainment good");
  return (good - 16) / 4;
}

std::string good_name(int good) {
  static constexpr const char* kFun[] = {"AW", "AP", "MU"};
  const std::string day = std::to_string(day_of(good));
  switch (kind_of(good)) {
    case GoodKind::kInFlight:
      return "in" + day;
    case GoodKind::kOutFlight:
      return "out" + day;
    case GoodKind::kHotel:
      return (good < 12 ? "TT" : "SS") + day;
    case GoodKind::kEntertainment:
      return kFun[fun_type_of(good)] + day;
  }
  return {};
}

std::optional<int> parse_good(std::string_view name) {
  for (int g = 0; g < kNumGoods; ++g) {
    if (good_name(g) == name) return g;
  }
  return std::nullopt;
}

GoodVector operator+(const GoodVector& a, const GoodVector& b) {
  GoodVector r{};
  for (int g = 0; g < kNumGoods; ++g) r[g] = a[g] + b[g];
  return r;
}

int total_units(const GoodVector& g) {
  int n = 0;
  for (int v : g) n += v;
  return n;
}

bool ClientPreferences::valid() const {
  if (arrival < 1 || arrival > 4 || departure < 2 || departure > 5) return false;
  if (hotel_premium < 0) return false;
  for (int v : fun) {
    if (v < 0) return false;
  }
  return true;
}

bool TravelPackage::feasible() const {
  if (arrival < 1 || arrival > 4 || departure < 2 || departure > 5) return false;
  if (departure <= arrival) return false;
  std::array<bool, 6> used{};
  for (int d : ticket_day) {
    if (d == 0) continue;
    if (d < arrival || d >= departure) return false;
    if (used[d]) return false;
    used[d] = true;
  }
  return true;
}

GoodVector TravelPackage::usage() const {
  GoodVector u{};
  u[in_flight(arrival)] += 1;
  u[out_flight(departure)] += 1;
  for (int n = arrival; n < departure; ++n) u[hotel_good(hotel, n)] += 1;
  for (int t = 0; t < kNumEntertainmentTypes; ++t) {
    if (ticket_day[t] != 0) u[fun_good(t, ticket_day[t])] += 1;
  }
  return u;
}

double client_utility(const ClientPreferences& prefs, const std::optional<TravelPackage>& pkg) {
  if (!pkg) return 0.0;
  if (!pkg->feasible()) throw std::invalid_argument("infeasible travel package");
  double u = 1000.0 - 100.0 * (std::abs(pkg->arrival - prefs.arrival) +
                               std::abs(pkg->departure - prefs.departure));
  if (pkg->hotel == HotelType::kTampaTowers) u += prefs.hotel_premium;
  for (int t = 0; t < kNumEntertainmentTypes; ++t) {
    if (pkg->ticket_day[t] != 0) u += prefs.fun[t];
  }
  return u;
}

const std::vector<TravelPackage>& base_packages() {
  static const std::vector<TravelPackage> packages = [] {
    std::vector<TravelPackage> v;
    for (int type = 0; type < 2; ++type) {
      for (int a = 1; a <= 4; ++a) {
        for (int d = a + 1; d <= 5; ++d) {
          v.push_back(TravelPackage{a, d, static_cast<HotelType>(type), {}});
        }
      }
    }
    return v;
  }();
  return packages;
}

}  // namespace tac
