#include "tac/predictors.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tac {
namespace {

constexpr double kUnknown = cde::kUnknown;

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void warn_untrained() {
  static std::once_flag once;
  std::call_once(once, [] { std::cerr << "warning: untrained hotel model, using current ask\n"; });
}

}  // namespace

std::vector<std::string> feature_names() {
  std::vector<std::string> n{"minutes_remaining"};
  auto per_room = [&](const std::string& prefix) {
    for (int r = 0; r < kNumHotels; ++r) n.push_back(prefix + "_" + good_name(room_to_good(r)));
  };
  per_room("price");
  per_room("close_minute");
  for (int f = 0; f < kNumFlights; ++f) n.push_back("flight_" + good_name(f));
  per_room("closed_price");
  per_room("open_ask");
  per_room("close_minus_target");
  per_room("minutes_until_close");
  n.push_back("num_players");
  for (int a = 0; a < kMaxAgents; ++a) n.push_back("player_" + std::to_string(a));
  return n;
}

std::vector<double> hotel_features(const MarketSnapshot& s, int target, const CloseMinutes& close) {
  if (target < 0 || target >= kNumHotels) throw std::out_of_range("room index");
  std::vector<double> x;
  x.reserve(kNumFeatures);
  const bool first_minute = s.minute == 1;
  x.push_back(13 - s.minute);
  for (int r = 0; r < kNumHotels; ++r) {
    x.push_back(s.closed[r] ? s.close_price[r] : (first_minute ? kUnknown : s.hotel_ask[r]));
  }
  for (int r = 0; r < kNumHotels; ++r) x.push_back(close[r]);
  for (int f = 0; f < kNumFlights; ++f) x.push_back(s.flight_ask[f]);
  for (int r = 0; r < kNumHotels; ++r) x.push_back(s.closed[r] ? s.close_price[r] : kUnknown);
  for (int r = 0; r < kNumHotels; ++r) {
    x.push_back(s.closed[r] || first_minute ? kUnknown : s.hotel_ask[r]);
  }
  for (int r = 0; r < kNumHotels; ++r) x.push_back(close[r] - close[target]);
  for (int r = 0; r < kNumHotels; ++r) x.push_back(close[r] - (s.minute - 1));
  x.push_back(s.num_players);
  for (double p : s.participation) x.push_back(p);
  return x;
}

int mirror_room(int room) { return 4 * (room / 4) + 3 - room % 4; }
int mirror_flight(int flight) { return 7 - flight; }

Canonical canonicalize(const MarketSnapshot& s, int room, const CloseMinutes& close) {
  Canonical c{s, close, room};
  if (room_night(room) <= 2) return c;
  for (int r = 0; r < kNumHotels; ++r) {
    const int m = mirror_room(r);
    c.snapshot.hotel_ask[m] = s.hotel_ask[r];
    c.snapshot.closed[m] = s.closed[r];
    c.snapshot.close_price[m] = s.close_price[r];
    c.snapshot.close_minute[m] = s.close_minute[r];
    c.close[m] = close[r];
  }
  for (int f = 0; f < kNumFlights; ++f) c.snapshot.flight_ask[mirror_flight(f)] = s.flight_ask[f];
  c.room = mirror_room(room);
  return c;
}

int bank_key(int canonical_room, int minute) {
  const int night = room_night(canonical_room);
  if (night > 2) throw std::invalid_argument("room is not canonical");
  return 4 * (canonical_room / 4) + 2 * (night == 2) + (minute > 1);
}

std::string bank_key_name(int key) {
  static constexpr const char* kType[] = {"TT", "SS"};
  static constexpr const char* kDay[] = {"outer", "inner"};
  static constexpr const char* kPhase[] = {"first", "later"};
  return std::string(kType[key / 4]) + "_" + kDay[key / 2 % 2] + "_" + kPhase[key % 2];
}

CloseMinutes sample_closing_order(const MarketSnapshot& s, std::mt19937_64& rng) {
  CloseMinutes out{};
  std::vector<int> free_minutes;
  for (int m = 4; m <= 11; ++m) {
    bool used = false;
    for (int r = 0; r < kNumHotels; ++r) used |= s.closed[r] && s.close_minute[r] == m;
    if (!used) free_minutes.push_back(m);
  }
  std::vector<int> open;
  for (int r = 0; r < kNumHotels; ++r) {
    if (s.closed[r]) {
      out[r] = s.close_minute[r];
    } else {
      open.push_back(r);
    }
  }
  if (open.size() != free_minutes.size()) throw std::invalid_argument("open rooms do not match free close minutes");
  std::shuffle(free_minutes.begin(), free_minutes.end(), rng);
  for (std::size_t i = 0; i < open.size(); ++i) out[open[i]] = free_minutes[i];
  return out;
}

PricePrediction PricePrediction::point(double price, double floor) {
  PricePrediction p;
  p.kind_ = Kind::kPoint;
  p.floor_ = floor;
  p.value_ = std::max(price, floor);
  return p;
}

PricePrediction PricePrediction::empirical(std::shared_ptr<const std::vector<double>> prices, double floor) {
  if (!prices || prices->empty()) throw std::invalid_argument("empty empirical distribution");
  PricePrediction p;
  p.kind_ = Kind::kEmpirical;
  p.floor_ = floor;
  p.value_ = std::max(floor, mean_of(*prices));
  p.prices_ = std::move(prices);
  return p;
}

PricePrediction PricePrediction::learned(const cde::CdeModel* model, std::vector<double> features, double current) {
  if (model == nullptr || model->empty()) throw std::invalid_argument("untrained model");
  PricePrediction p;
  p.kind_ = Kind::kLearned;
  p.floor_ = current;
  p.model_ = model;
  p.features_ = std::move(features);
  p.value_ = current + model->expected_positive_part(p.features_);
  return p;
}

double PricePrediction::sample(std::mt19937_64& rng) const {
  switch (kind_) {
    case Kind::kPoint:
      return value_;
    case Kind::kEmpirical: {
      const auto i = std::uniform_int_distribution<std::size_t>(0, prices_->size() - 1)(rng);
      return std::max(floor_, (*prices_)[i]);
    }
    case Kind::kLearned:
      return floor_ + std::max(0.0, model_->sample(features_, rng));
  }
  return value_;
}

double PricePrediction::mean() const { return value_; }

bool HotelModelBank::trained() const {
  return std::all_of(models.begin(), models.end(), [](const cde::CdeModel& m) { return !m.empty(); });
}

void HotelModelBank::save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest = {{"format", "tac-bank"},
                             {"version", 1},
                             {"feature_version", kFeatureVersion},
                             {"model_version", version},
                             {"models", nlohmann::json::object()}};
  for (int k = 0; k < kNumBankKeys; ++k) {
    const std::string name = bank_key_name(k);
    if (models[k].empty()) {
      manifest["models"][name] = nullptr;
    } else {
      models[k].save(dir + "/" + name + ".json");
      manifest["models"][name] = name + ".json";
    }
  }
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw std::runtime_error("cannot write bank manifest in " + dir);
  out << manifest.dump(2) << '\n';
}

HotelModelBank HotelModelBank::load(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw std::runtime_error("no bank manifest in " + dir);
  const nlohmann::json manifest = nlohmann::json::parse(in);
  if (manifest.value("format", "") != "tac-bank") throw std::invalid_argument("not a model bank manifest");
  if (manifest.value("feature_version", 0) != kFeatureVersion) throw std::invalid_argument("feature layout mismatch");
  HotelModelBank bank;
  bank.version = manifest.value("model_version", 0);
  for (int k = 0; k < kNumBankKeys; ++k) {
    const auto& entry = manifest.at("models").at(bank_key_name(k));
    if (!entry.is_null()) bank.models[k] = cde::CdeModel::load(dir + "/" + entry.get<std::string>());
  }
  return bank;
}

std::array<cde::Dataset, kNumBankKeys> extract_training_set(const std::vector<GameSummary>& games) {
  std::array<cde::Dataset, kNumBankKeys> out;
  const auto names = feature_names();
  for (auto& d : out) d.feature_names = names;
  for (const auto& g : games) {
    if (!g.complete()) continue;
    for (int minute = 1; minute <= 11; ++minute) {
      const MarketSnapshot s = snapshot_at(g, minute);
      for (int r = 0; r < kNumHotels; ++r) {
        if (s.closed[r]) continue;
        const Canonical c = canonicalize(s, r, g.close_minute);
        out[bank_key(c.room, minute)].add(hotel_features(c.snapshot, c.room, c.close),
                                          g.close_price[r] - s.hotel_ask[r]);
      }
    }
  }
  return out;
}

HotelModelBank train_bank(const std::vector<GameSummary>& games, const BankTrainOptions& options, int version) {
  const auto sets = extract_training_set(games);
  HotelModelBank bank;
  bank.version = version;
  for (int k = 0; k < kNumBankKeys; ++k) {
    if (static_cast<int>(sets[k].size()) < std::max(1, options.min_examples)) continue;
    bank.models[k] = cde::train(sets[k], options.cde).model;
  }
  return bank;
}

HistoricalPriceTable HistoricalPriceTable::build(const std::vector<GameSummary>& games) {
  std::array<std::array<std::vector<double>, kNumHotels>, 2> by_minute;
  std::array<std::vector<double>, 2> by_type;
  for (const auto& g : games) {
    if (!g.complete()) continue;
    for (int r = 0; r < kNumHotels; ++r) {
      const int type = r / 4;
      by_minute[type][g.close_minute[r] - 4].push_back(g.close_price[r]);
      by_type[type].push_back(g.close_price[r]);
    }
  }
  HistoricalPriceTable t;
  for (int type = 0; type < 2; ++type) {
    if (!by_type[type].empty()) t.by_type[type] = std::make_shared<std::vector<double>>(std::move(by_type[type]));
    for (int m = 0; m < kNumHotels; ++m) {
      if (!by_minute[type][m].empty()) {
        t.by_minute[type][m] = std::make_shared<std::vector<double>>(std::move(by_minute[type][m]));
      }
    }
  }
  return t;
}

bool HistoricalPriceTable::empty() const { return !by_type[0] && !by_type[1]; }

std::string to_string(PredictorVariant v) {
  switch (v) {
    case PredictorVariant::kLearnedS:
      return "learned_s";
    case PredictorVariant::kLearnedEv:
      return "learned_ev";
    case PredictorVariant::kCondlS:
      return "condl_s";
    case PredictorVariant::kCondlEv:
      return "condl_ev";
    case PredictorVariant::kSimpleS:
      return "simple_s";
    case PredictorVariant::kSimpleEv:
      return "simple_ev";
    case PredictorVariant::kCurrentBid:
      return "current_bid";
  }
  return "?";
}

std::optional<PredictorVariant> parse_variant(const std::string& name) {
  for (auto v : {PredictorVariant::kLearnedS, PredictorVariant::kLearnedEv, PredictorVariant::kCondlS,
                 PredictorVariant::kCondlEv, PredictorVariant::kSimpleS, PredictorVariant::kSimpleEv,
                 PredictorVariant::kCurrentBid}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

bool is_ev(PredictorVariant v) {
  return v == PredictorVariant::kLearnedEv || v == PredictorVariant::kCondlEv || v == PredictorVariant::kSimpleEv ||
         v == PredictorVariant::kCurrentBid;
}

PricePrediction current_bid(const MarketSnapshot& s, int room) {
  return PricePrediction::point(s.hotel_ask.at(room), s.hotel_ask.at(room));
}

PricePrediction simple_mean(const HistoricalPriceTable& table, const MarketSnapshot& s, int room, bool ev) {
  const auto& prices = table.by_type[room / 4];
  if (!prices) return current_bid(s, room);
  auto p = PricePrediction::empirical(prices, s.hotel_ask.at(room));
  return ev ? PricePrediction::point(p.mean(), p.floor()) : p;
}

PricePrediction condl_mean(const HistoricalPriceTable& table, const MarketSnapshot& s, int room, int close_minute,
                           bool ev) {
  if (close_minute < 4 || close_minute > 11) throw std::invalid_argument("close minute out of range");
  const auto& prices = table.by_minute[room / 4][close_minute - 4];
  if (!prices) return simple_mean(table, s, room, ev);
  auto p = PricePrediction::empirical(prices, s.hotel_ask.at(room));
  return ev ? PricePrediction::point(p.mean(), p.floor()) : p;
}

PricePrediction predict_hotel(const HotelModelBank& bank, const MarketSnapshot& s, int room,
                              const CloseMinutes& close) {
  if (s.closed.at(room)) throw std::invalid_argument("room already closed");
  const Canonical c = canonicalize(s, room, close);
  const cde::CdeModel& model = bank.models[bank_key(c.room, s.minute)];
  if (model.empty()) {
    warn_untrained();
    return current_bid(s, room);
  }
  return PricePrediction::learned(&model, hotel_features(c.snapshot, c.room, c.close), s.hotel_ask[room]);
}

FlightPriceModel flight_fit(const std::vector<GameSummary>& games) {
  double zz = 0.0, zd = 0.0;
  for (const auto& g : games) {
    for (int f = 0; f < kNumFlights; ++f) {
      const auto& q = g.flight_quotes[f];
      if (q.empty()) continue;
      for (std::size_t i = 1; i < q.size(); ++i) {
        const double tau = static_cast<double>(q[i].t - q[0].t) / kGameSeconds;
        const double z = tau * tau * (g.flight_y[f] - 10.0);
        zz += z * z;
        zd += z * (q[i].ask - q[0].ask);
      }
    }
  }
  return {zz > 0.0 ? std::max(0.0, zd / zz) : 0.0};
}

double flight_predict(const FlightPriceModel& model, const Quote& first, const Quote& latest, int T) {
  if (latest.t <= first.t || model.m <= 0.0 || T <= latest.t) return latest.ask;
  auto sq = [](int t) {
    const double tau = static_cast<double>(t) / kGameSeconds;
    return tau * tau;
  };
  const double y = std::clamp(10.0 + (latest.ask - first.ask) / (model.m * (sq(latest.t) - sq(first.t))), 10.0, 90.0);
  const double predicted = latest.ask + model.m * (sq(T) - sq(latest.t)) * (y - 10.0);
  return std::max(latest.ask, predicted);
}

PricePrediction predict(PredictorVariant variant, const PredictorResources& res, const MarketSnapshot& s, int room,
                        const CloseMinutes& close) {
  switch (variant) {
    case PredictorVariant::kLearnedS:
      return predict_hotel(res.bank, s, room, close);
    case PredictorVariant::kLearnedEv: {
      const auto p = predict_hotel(res.bank, s, room, close);
      return PricePrediction::point(p.mean(), p.floor());
    }
    case PredictorVariant::kCondlS:
      return condl_mean(res.table, s, room, close[room], false);
    case PredictorVariant::kCondlEv:
      return condl_mean(res.table, s, room, close[room], true);
    case PredictorVariant::kSimpleS:
      return simple_mean(res.table, s, room, false);
    case PredictorVariant::kSimpleEv:
      return simple_mean(res.table, s, room, true);
    case PredictorVariant::kCurrentBid:
      return current_bid(s, room);
  }
  throw std::invalid_argument("unknown predictor variant");
}

}  // namespace tac
