#include "tac/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tac/allocator.hpp"
#include "tac/random.hpp"

namespace tac {
namespace {

using nlohmann::json;

enum Stream : std::uint64_t { kPrefs = 1, kEndowment = 2, kFlights = 3, kCloseOrder = 4 };

json client_json(const ClientPreferences& c) {
  return {{"arrival", c.arrival}, {"departure", c.departure}, {"hotel_premium", c.hotel_premium}, {"fun", c.fun}};
}

json optional_price(const std::optional<double>& p) { return p ? json(*p) : json(nullptr); }

bool crosses(Side incoming, double incoming_price, double resting_price) {
  return incoming == Side::kBuy ? incoming_price >= resting_price : incoming_price <= resting_price;
}

// Best first: highest bid, lowest ask, then arrival order.
void sort_book_side(std::vector<EntOrder>& orders, Side side) {
  std::stable_sort(orders.begin(), orders.end(), [side](const EntOrder& a, const EntOrder& b) {
    if (a.price != b.price) return side == Side::kBuy ? a.price > b.price : a.price < b.price;
    return a.seq < b.seq;
  });
}

}  // namespace

const char* to_string(Side s) { return s == Side::kBuy ? "buy" : "sell"; }

Market::Market(std::uint64_t seed, int num_agents, MarketConfig config)
    : seed_(seed), num_agents_(num_agents), config_(config) {
  if (num_agents < 1 || num_agents > kMaxAgents) throw std::invalid_argument("agent count must be in 1..8");
  if (!(config.flight_min <= config.flight_initial_min && config.flight_initial_min <= config.flight_initial_max &&
        config.flight_initial_max <= config.flight_max)) {
    throw std::invalid_argument("inconsistent flight price range");
  }
  agents_.resize(num_agents);

  std::mt19937_64 prefs_rng(derive_seed(seed, kPrefs));
  for (auto& a : agents_) {
    for (int c = 0; c < kClientsPerAgent; ++c) {
      ClientPreferences p;
      p.arrival = std::uniform_int_distribution<int>(1, 4)(prefs_rng);
      p.departure = std::uniform_int_distribution<int>(p.arrival + 1, 5)(prefs_rng);
      p.hotel_premium = std::uniform_int_distribution<int>(50, 150)(prefs_rng);
      for (int& f : p.fun) f = std::uniform_int_distribution<int>(0, 200)(prefs_rng);
      a.clients.push_back(p);
    }
  }

  std::mt19937_64 endow_rng(derive_seed(seed, kEndowment));
  for (auto& a : agents_) {
    std::array<int, kNumEntertainment> types{};
    std::iota(types.begin(), types.end(), 0);
    // Partial Fisher-Yates: the first four entries are a uniform 4-subset in uniform order.
    for (int i = 0; i < 4; ++i) {
      const int j = std::uniform_int_distribution<int>(i, kNumEntertainment - 1)(endow_rng);
      std::swap(types[i], types[j]);
    }
    constexpr int kBlocks[4] = {4, 4, 2, 2};
    for (int i = 0; i < 4; ++i) a.holdings[16 + types[i]] = kBlocks[i];
  }

  for (int f = 0; f < kNumFlights; ++f) {
    Flight& fl = flights_[f];
    fl.rng.seed(derive_seed(seed, kFlights, f));
    fl.y = std::uniform_real_distribution<double>(10.0, 90.0)(fl.rng);
    fl.ask = std::uniform_real_distribution<double>(config.flight_initial_min, config.flight_initial_max)(fl.rng);
    fl.next_tick = std::uniform_int_distribution<int>(24, 32)(fl.rng);
  }

  std::mt19937_64 order_rng(derive_seed(seed, kCloseOrder));
  std::array<int, kNumHotels> order{};
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), order_rng);
  for (int slot = 0; slot < kNumHotels; ++slot) close_minute_[order[slot]] = 4 + slot;

  for (int a = 0; a < num_agents; ++a) {
    json clients = json::array();
    for (const auto& c : agents_[a].clients) clients.push_back(client_json(c));
    log({{"type", "prefs"}, {"agent", a}, {"clients", clients}});
  }
  for (int a = 0; a < num_agents; ++a) {
    json h = json::object();
    for (int g = 16; g < kNumGoods; ++g) {
      if (agents_[a].holdings[g] > 0) h[good_name(g)] = agents_[a].holdings[g];
    }
    log({{"type", "endowment"}, {"agent", a}, {"goods", h}});
  }
  json ys = json::array();
  for (const auto& fl : flights_) ys.push_back(fl.y);
  log({{"type", "hidden"}, {"flight_y", ys}, {"close_minute", close_minute_}});
  for (int f = 0; f < kNumFlights; ++f) log({{"type", "quote"}, {"good", f}, {"ask", flights_[f].ask}});
  for (int r = 0; r < kNumHotels; ++r) log({{"type", "quote"}, {"good", room_to_good(r)}, {"ask", 0.0}});
}

void Market::log(json event) {
  json e = {{"seq", seq_++}, {"t", time_}};
  e.update(event);
  events_.push_back(std::move(e));
}

void Market::check_agent(int agent) const {
  if (agent < 0 || agent >= num_agents_) throw std::out_of_range("agent index");
}

void Market::advance_to(int t) {
  if (t > kGameSeconds) throw std::invalid_argument("time beyond game end");
  while (time_ < t) {
    ++time_;
    for (int f = 0; f < kNumFlights; ++f) {
      if (flights_[f].next_tick == time_) tick_flight(f);
    }
    if (time_ % 60 == 0) {
      const int minute = time_ / 60;
      update_hotel_asks();
      for (int r = 0; r < kNumHotels; ++r) {
        if (close_minute_[r] == minute) close_hotel(r);
      }
    }
  }
}

void Market::tick_flight(int good) {
  Flight& fl = flights_[good];
  const double x = 10.0 + (fl.y - 10.0) * time_ / kGameSeconds;
  const double delta = std::uniform_real_distribution<double>(-10.0, x)(fl.rng);
  fl.ask = std::clamp(fl.ask + delta, config_.flight_min, config_.flight_max);
  fl.next_tick = time_ + std::uniform_int_distribution<int>(24, 32)(fl.rng);
  log({{"type", "quote"}, {"good", good}, {"ask", fl.ask}});
}

double Market::sixteenth_price(const std::vector<HotelUnit>& units) {
  if (static_cast<int>(units.size()) < kRoomsPerHotel) return 0.0;
  std::vector<double> prices;
  for (const auto& u : units) prices.push_back(u.price);
  std::nth_element(prices.begin(), prices.begin() + (kRoomsPerHotel - 1), prices.end(), std::greater<>());
  return prices[kRoomsPerHotel - 1];
}

int Market::units_won(std::vector<HotelUnit> units, int agent) {
  std::sort(units.begin(), units.end(), [](const HotelUnit& a, const HotelUnit& b) {
    return a.price != b.price ? a.price > b.price : a.seq < b.seq;
  });
  int won = 0;
  for (int i = 0; i < static_cast<int>(units.size()) && i < kRoomsPerHotel; ++i) won += units[i].agent == agent;
  return won;
}

void Market::update_hotel_asks() {
  for (int r = 0; r < kNumHotels; ++r) {
    Hotel& h = hotels_[r];
    if (h.closed) continue;
    h.ask = sixteenth_price(h.units);
    log({{"type", "quote"}, {"good", room_to_good(r)}, {"ask", h.ask}});
  }
}

void Market::close_hotel(int room) {
  Hotel& h = hotels_[room];
  auto& units = h.units;
  std::sort(units.begin(), units.end(), [](const HotelUnit& a, const HotelUnit& b) {
    return a.price != b.price ? a.price > b.price : a.seq < b.seq;
  });
  const int sold = std::min<int>(units.size(), kRoomsPerHotel);
  double price = config_.hotel_price_floor;
  if (sold == kRoomsPerHotel) {
    price = units[kRoomsPerHotel - 1].price;
  } else if (sold > 0) {
    price = std::max(config_.hotel_price_floor, units[sold - 1].price);
  }
  if (static_cast<int>(units.size()) >= kRoomsPerHotel) {
    std::vector<double> prices;
    for (const auto& u : units) prices.push_back(u.price);
    std::sort(prices.begin(), prices.end());
    if (prices[prices.size() - kRoomsPerHotel] != price) ++clearing_violations_;
  }
  const int good = room_to_good(room);
  std::vector<int> won(num_agents_, 0);
  for (int i = 0; i < sold; ++i) ++won[units[i].agent];
  for (int a = 0; a < num_agents_; ++a) {
    agents_[a].holdings[good] += won[a];
    agents_[a].expenditure += won[a] * price;
  }
  h.closed = true;
  h.close_price = price;
  h.close_minute = time_ / 60;
  units.clear();
  log({{"type", "close"}, {"good", good}, {"minute", h.close_minute}, {"price", price}, {"winners", won}});
}

double Market::flight_ask(int good) const {
  if (!is_flight(good)) throw std::invalid_argument("not a flight");
  return flights_[good].ask;
}

double Market::flight_hidden_y(int good) const {
  if (!is_flight(good)) throw std::invalid_argument("not a flight");
  return flights_[good].y;
}

double Market::hotel_ask(int good) const {
  if (!is_hotel(good)) throw std::invalid_argument("not a hotel");
  return hotels_[good_to_room(good)].ask;
}

bool Market::hotel_closed(int good) const {
  if (!is_hotel(good)) throw std::invalid_argument("not a hotel");
  return hotels_[good_to_room(good)].closed;
}

std::optional<double> Market::hotel_close_price(int good) const {
  if (!hotel_closed(good)) return std::nullopt;
  return hotels_[good_to_room(good)].close_price;
}

int Market::hotel_close_minute(int good) const {
  if (!is_hotel(good)) throw std::invalid_argument("not a hotel");
  return hotels_[good_to_room(good)].close_minute;
}

std::vector<double> Market::hotel_bids(int agent, int good) const {
  check_agent(agent);
  if (!is_hotel(good)) throw std::invalid_argument("not a hotel");
  std::vector<double> out;
  for (const auto& u : hotels_[good_to_room(good)].units) {
    if (u.agent == agent) out.push_back(u.price);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

int Market::hotel_units_winning(int agent, int good) const {
  check_agent(agent);
  if (!is_hotel(good)) throw std::invalid_argument("not a hotel");
  return units_won(hotels_[good_to_room(good)].units, agent);
}

std::optional<double> Market::ent_best_bid(int good) const {
  if (!is_fun(good)) throw std::invalid_argument("not an entertainment good");
  const auto& bids = books_[good - 16].bids;
  if (bids.empty()) return std::nullopt;
  return bids.front().price;
}

std::optional<double> Market::ent_best_ask(int good) const {
  if (!is_fun(good)) throw std::invalid_argument("not an entertainment good");
  const auto& asks = books_[good - 16].asks;
  if (asks.empty()) return std::nullopt;
  return asks.front().price;
}

std::vector<EntOrder> Market::ent_orders(int agent, int good, Side side) const {
  check_agent(agent);
  if (!is_fun(good)) throw std::invalid_argument("not an entertainment good");
  const Book& book = books_[good - 16];
  std::vector<EntOrder> out;
  for (const auto& o : side == Side::kBuy ? book.bids : book.asks) {
    if (o.agent == agent) out.push_back(o);
  }
  return out;
}

ActionResult Market::buy_flight(int agent, int good, double price, int qty) {
  check_agent(agent);
  if (!is_flight(good)) throw std::invalid_argument("not a flight");
  log({{"type", "bid"}, {"kind", "flight"}, {"agent", agent}, {"good", good}, {"price", price}, {"qty", qty}});
  ActionResult res;
  if (over()) {
    res.reason = "closed";
  } else if (qty < 1 || !std::isfinite(price)) {
    res.reason = "malformed";
  } else if (price < flights_[good].ask) {
    res.reason = "below_ask";
  }
  if (!res.reason.empty()) {
    log({{"type", "reject"}, {"agent", agent}, {"good", good}, {"reason", res.reason}});
    return res;
  }
  const double ask = flights_[good].ask;
  agents_[agent].holdings[good] += qty;
  agents_[agent].expenditure += ask * qty;
  for (int u = 0; u < qty; ++u) {
    log({{"type", "trade"}, {"good", good}, {"buyer", agent}, {"seller", nullptr}, {"price", ask}, {"qty", 1}});
  }
  res.accepted = true;
  res.filled = qty;
  res.paid = ask * qty;
  return res;
}

ActionResult Market::bid_hotel(int agent, int good, std::vector<double> units) {
  check_agent(agent);
  if (!is_hotel(good)) throw std::invalid_argument("not a hotel");
  std::sort(units.begin(), units.end(), std::greater<>());
  log({{"type", "bid"}, {"kind", "hotel"}, {"agent", agent}, {"good", good}, {"units", units}});
  Hotel& h = hotels_[good_to_room(good)];
  ActionResult res;
  auto reject = [&](const char* reason) {
    res.reason = reason;
    log({{"type", "reject"}, {"agent", agent}, {"good", good}, {"reason", reason}});
    return res;
  };
  if (h.closed || over()) return reject("closed");
  if (static_cast<int>(units.size()) > kRoomsPerHotel) return reject("too_many_units");
  for (double p : units) {
    if (!std::isfinite(p) || p <= 0.0) return reject("malformed");
  }

  // Units whose price already stands keep their place in the queue.
  std::vector<HotelUnit> others;
  std::vector<HotelUnit> mine;
  for (const auto& u : h.units) (u.agent == agent ? mine : others).push_back(u);
  std::sort(mine.begin(), mine.end(), [](const HotelUnit& a, const HotelUnit& b) {
    return a.price != b.price ? a.price > b.price : a.seq < b.seq;
  });
  std::vector<HotelUnit> replacement;
  std::vector<bool> used(mine.size(), false);
  long next_seq = unit_seq_;
  for (double p : units) {
    bool matched = false;
    for (std::size_t j = 0; j < mine.size(); ++j) {
      if (!used[j] && mine[j].price == p) {
        used[j] = true;
        replacement.push_back(mine[j]);
        matched = true;
        break;
      }
    }
    if (!matched) {
      if (!(p > h.ask)) return reject("below_quote");
      replacement.push_back({agent, p, next_seq++});
    }
  }
  std::vector<HotelUnit> current = others;
  current.insert(current.end(), mine.begin(), mine.end());
  std::vector<HotelUnit> proposed = others;
  proposed.insert(proposed.end(), replacement.begin(), replacement.end());
  if (units_won(proposed, agent) < units_won(current, agent)) return reject("reduces_units_won");

  unit_seq_ = next_seq;
  h.units = std::move(proposed);
  res.accepted = true;
  return res;
}

ActionResult Market::order_entertainment(int agent, int good, Side side, double price, int qty) {
  check_agent(agent);
  if (!is_fun(good)) throw std::invalid_argument("not an entertainment good");
  log({{"type", "bid"},
       {"kind", "entertainment"},
       {"agent", agent},
       {"good", good},
       {"side", to_string(side)},
       {"price", price},
       {"qty", qty}});
  Book& book = books_[good - 16];
  ActionResult res;
  auto reject = [&](const char* reason) {
    res.reason = reason;
    log({{"type", "reject"}, {"agent", agent}, {"good", good}, {"reason", reason}});
    return res;
  };
  if (over()) return reject("closed");
  if (qty < 1 || !std::isfinite(price) || price < 0.0) return reject("malformed");
  std::vector<EntOrder>& own_side = side == Side::kBuy ? book.bids : book.asks;
  std::vector<EntOrder>& opposite = side == Side::kBuy ? book.asks : book.bids;
  if (side == Side::kSell) {
    int resting = 0;
    for (const auto& o : book.asks) {
      if (o.agent == agent) resting += o.qty;
    }
    if (qty > agents_[agent].holdings[good] - resting) return reject("short_sale");
  }
  for (const auto& o : opposite) {
    if (o.agent == agent && crosses(side, price, o.price)) return reject("self_cross");
  }

  res.accepted = true;
  int remaining = qty;
  while (remaining > 0 && !opposite.empty() && crosses(side, price, opposite.front().price)) {
    EntOrder& rest = opposite.front();
    const int q = std::min(remaining, rest.qty);
    const int buyer = side == Side::kBuy ? agent : rest.agent;
    const int seller = side == Side::kBuy ? rest.agent : agent;
    agents_[buyer].holdings[good] += q;
    agents_[seller].holdings[good] -= q;
    agents_[buyer].expenditure += rest.price * q;
    agents_[seller].expenditure -= rest.price * q;
    log({{"type", "trade"}, {"good", good}, {"buyer", buyer}, {"seller", seller}, {"price", rest.price}, {"qty", q}});
    res.filled += q;
    res.paid += (side == Side::kBuy ? 1.0 : -1.0) * rest.price * q;
    remaining -= q;
    rest.qty -= q;
    if (rest.qty == 0) opposite.erase(opposite.begin());
  }
  if (remaining > 0) {
    own_side.push_back({agent, price, remaining, unit_seq_++});
    sort_book_side(own_side, side);
  }
  log_ent_quote(good);
  return res;
}

void Market::withdraw_entertainment(int agent, int good, Side side) {
  check_agent(agent);
  if (!is_fun(good)) throw std::invalid_argument("not an entertainment good");
  log({{"type", "withdraw"}, {"agent", agent}, {"good", good}, {"side", to_string(side)}});
  auto& orders = side == Side::kBuy ? books_[good - 16].bids : books_[good - 16].asks;
  const auto before = orders.size();
  std::erase_if(orders, [agent](const EntOrder& o) { return o.agent == agent; });
  if (orders.size() != before) log_ent_quote(good);
}

void Market::log_ent_quote(int good) {
  log({{"type", "quote"},
       {"good", good},
       {"bid", optional_price(ent_best_bid(good))},
       {"ask", optional_price(ent_best_ask(good))}});
}

std::vector<AgentScore> Market::final_scores() {
  if (!over()) throw std::logic_error("game is not over");
  std::vector<AgentScore> out;
  for (int a = 0; a < num_agents_; ++a) {
    AgentScore s;
    s.utility = v(agents_[a].holdings, agents_[a].clients);
    s.expenditure = agents_[a].expenditure;
    s.score = s.utility - s.expenditure;
    log({{"type", "score"}, {"agent", a}, {"utility", s.utility}, {"expenditure", s.expenditure}, {"score", s.score}});
    out.push_back(s);
  }
  return out;
}

}  // namespace tac
