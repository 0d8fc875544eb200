#include "tac/record.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tac {

using nlohmann::json;

json make_header(const Market& market, const std::vector<std::string>& agent_names, std::uint64_t game_index,
                 int model_version) {
  if (static_cast<int>(agent_names.size()) != market.num_agents()) {
    throw std::invalid_argument("one name per agent");
  }
  const MarketConfig& c = market.config();
  return {{"format", "tac-game"},
          {"version", kRecordVersion},
          {"seed", market.seed()},
          {"game_index", game_index},
          {"model_version", model_version},
          {"agents", agent_names},
          {"market",
           {{"flight_initial_min", c.flight_initial_min},
            {"flight_initial_max", c.flight_initial_max},
            {"flight_min", c.flight_min},
            {"flight_max", c.flight_max},
            {"hotel_price_floor", c.hotel_price_floor}}}};
}

MarketConfig config_from_header(const json& header) {
  MarketConfig c;
  if (!header.contains("market")) return c;
  const json& m = header["market"];
  c.flight_initial_min = m.value("flight_initial_min", c.flight_initial_min);
  c.flight_initial_max = m.value("flight_initial_max", c.flight_initial_max);
  c.flight_min = m.value("flight_min", c.flight_min);
  c.flight_max = m.value("flight_max", c.flight_max);
  c.hotel_price_floor = m.value("hotel_price_floor", c.hotel_price_floor);
  return c;
}

void write_record(std::ostream& out, const GameRecord& record) {
  out << record.header.dump() << '\n';
  for (const auto& e : record.events) out << e.dump() << '\n';
}

void write_record_file(const std::string& path, const GameRecord& record) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_record(out, record);
}

GameRecord read_record(std::istream& in) {
  GameRecord r;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (first) {
      if (j.value("format", "") != "tac-game") throw std::invalid_argument("not a game record");
      if (j.value("version", 0) != kRecordVersion) throw std::invalid_argument("unsupported record version");
      r.header = std::move(j);
      first = false;
    } else {
      r.events.push_back(std::move(j));
    }
  }
  if (first) throw std::invalid_argument("empty record");
  return r;
}

GameRecord read_record_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_record(in);
}

bool GameSummary::complete() const {
  for (bool c : closed) {
    if (!c) return false;
  }
  return true;
}

GameSummary summarize(const std::vector<json>& events) {
  GameSummary s;
  bool hidden = false;
  for (const auto& e : events) {
    const std::string type = e.at("type").get<std::string>();
    if (type == "prefs") {
      s.num_agents = std::max(s.num_agents, e.at("agent").get<int>() + 1);
    } else if (type == "hidden") {
      const auto ys = e.at("flight_y").get<std::vector<double>>();
      const auto mins = e.at("close_minute").get<std::vector<int>>();
      if (ys.size() != kNumFlights || mins.size() != kNumHotels) throw std::invalid_argument("malformed hidden event");
      std::copy(ys.begin(), ys.end(), s.flight_y.begin());
      hidden = true;
    } else if (type == "quote") {
      const int good = e.at("good").get<int>();
      const int t = e.at("t").get<int>();
      if (is_flight(good)) {
        s.flight_quotes[good].push_back({t, e.at("ask").get<double>()});
      } else if (is_hotel(good)) {
        s.hotel_quotes[good_to_room(good)].push_back({t, e.at("ask").get<double>()});
      }
    } else if (type == "close") {
      const int room = good_to_room(e.at("good").get<int>());
      s.closed[room] = true;
      s.close_minute[room] = e.at("minute").get<int>();
      s.close_price[room] = e.at("price").get<double>();
    } else if (type == "score") {
      const int a = e.at("agent").get<int>();
      if (static_cast<int>(s.scores.size()) <= a) s.scores.resize(a + 1);
      s.scores[a] = {e.at("utility").get<double>(), e.at("expenditure").get<double>(), e.at("score").get<double>()};
    }
  }
  if (!hidden) throw std::invalid_argument("record has no hidden-parameter event");
  return s;
}

MarketSnapshot snapshot(const Market& market, int minute) {
  MarketSnapshot s;
  s.minute = minute;
  for (int f = 0; f < kNumFlights; ++f) s.flight_ask[f] = market.flight_ask(f);
  for (int r = 0; r < kNumHotels; ++r) {
    const int g = room_to_good(r);
    s.closed[r] = market.hotel_closed(g);
    s.hotel_ask[r] = s.closed[r] ? 0.0 : market.hotel_ask(g);
    s.close_price[r] = market.hotel_close_price(g).value_or(0.0);
    s.close_minute[r] = market.hotel_close_minute(g);
  }
  s.num_players = market.num_agents();
  return s;
}

namespace {

double last_quote(const std::vector<Quote>& quotes, int t) {
  double ask = 0.0;
  for (const auto& q : quotes) {
    if (q.t > t) break;
    ask = q.ask;
  }
  return ask;
}

}  // namespace

MarketSnapshot snapshot_at(const GameSummary& game, int minute) {
  const int t = decision_time(minute);
  MarketSnapshot s;
  s.minute = minute;
  for (int f = 0; f < kNumFlights; ++f) s.flight_ask[f] = last_quote(game.flight_quotes[f], t);
  for (int r = 0; r < kNumHotels; ++r) {
    s.closed[r] = game.closed[r] && 60 * game.close_minute[r] <= t;
    if (s.closed[r]) {
      s.close_price[r] = game.close_price[r];
      s.close_minute[r] = game.close_minute[r];
    } else {
      s.hotel_ask[r] = last_quote(game.hotel_quotes[r], t);
    }
  }
  s.num_players = game.num_agents;
  return s;
}

ReplayVerdict replay(const GameRecord& record) {
  ReplayVerdict v;
  const json& h = record.header;
  const int agents = static_cast<int>(h.at("agents").size());
  Market m(h.at("seed").get<std::uint64_t>(), agents, config_from_header(h));
  try {
    for (const auto& e : record.events) {
      const std::string type = e.at("type").get<std::string>();
      if (type != "bid" && type != "withdraw") continue;
      const int t = e.at("t").get<int>();
      if (t < m.time()) throw std::invalid_argument("actions out of time order");
      m.advance_to(t);
      const int agent = e.at("agent").get<int>();
      const int good = e.at("good").get<int>();
      if (type == "withdraw") {
        m.withdraw_entertainment(agent, good, e.at("side") == "buy" ? Side::kBuy : Side::kSell);
        continue;
      }
      const std::string kind = e.at("kind").get<std::string>();
      if (kind == "flight") {
        m.buy_flight(agent, good, e.at("price").get<double>(), e.at("qty").get<int>());
      } else if (kind == "hotel") {
        m.bid_hotel(agent, good, e.at("units").get<std::vector<double>>());
      } else if (kind == "entertainment") {
        m.order_entertainment(agent, good, e.at("side") == "buy" ? Side::kBuy : Side::kSell,
                              e.at("price").get<double>(), e.at("qty").get<int>());
      } else {
        throw std::invalid_argument("unknown action kind " + kind);
      }
    }
    m.advance_to(kGameSeconds);
    m.final_scores();
  } catch (const std::exception& ex) {
    v.message = std::string("replay failed: ") + ex.what();
  }

  const auto& regenerated = m.events();
  const std::size_t n = std::max(regenerated.size(), record.events.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string a = i < record.events.size() ? record.events[i].dump() : "<missing>";
    const std::string b = i < regenerated.size() ? regenerated[i].dump() : "<missing>";
    if (a != b) {
      v.first_mismatch = i;
      v.expected = a;
      v.actual = b;
      v.events_checked = i;
      if (v.message.empty()) v.message = "event " + std::to_string(i) + " differs";
      return v;
    }
  }
  v.events_checked = n;
  v.ok = v.message.empty();
  return v;
}

}  // namespace tac
