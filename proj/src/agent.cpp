#include "tac/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tac {
namespace {

constexpr double kEarlyBid = 1001.0;

bool leq(double a, double b) { return a <= b + 1e-6 * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

void AgentConfig::validate() const {
  if (flight_lookahead < 1) throw std::invalid_argument("flight_lookahead must be at least 1");
  if (hotel_samples < 1 || flight_samples < 1 || entertainment_samples < 1) {
    throw std::invalid_argument("scenario budgets must be at least 1");
  }
  if (max_units < 1 || max_units > kRoomsPerHotel) throw std::invalid_argument("max_units must be in 1..16");
  if (margin_start < 0.0 || margin_end < 0.0) throw std::invalid_argument("margins must be nonnegative");
  for (double c : {c_early_cheap, c_early_expensive, c_late_cheap, c_late_expensive}) {
    if (!(c >= 1.0)) throw std::invalid_argument("impact constants must be >= 1");
  }
  if (expected_price_orders < 1) throw std::invalid_argument("expected_price_orders must be at least 1");
}

double AgentConfig::impact(int room, int close_minute) const {
  if (!price_impact) return 1.0;
  const bool early = close_minute <= 7;
  const bool expensive = room_type(room) == HotelType::kTampaTowers;
  if (early) return expensive ? c_early_expensive : c_early_cheap;
  return expensive ? c_late_expensive : c_late_cheap;
}

double entertainment_margin(const AgentConfig& config, int t) {
  const double f = std::clamp(static_cast<double>(t) / kGameSeconds, 0.0, 1.0);
  return config.margin_start + (config.margin_end - config.margin_start) * f;
}

void InvariantMonitor::merge(const InvariantMonitor& o) {
  hotel_checks += o.hotel_checks;
  hotel_monotone_violations += o.hotel_monotone_violations;
  hotel_diminishing_violations += o.hotel_diminishing_violations;
  flight_checks += o.flight_checks;
  flight_violations += o.flight_violations;
  entertainment_checks += o.entertainment_checks;
  entertainment_violations += o.entertainment_violations;
  prediction_checks += o.prediction_checks;
  prediction_floor_violations += o.prediction_floor_violations;
  lp_failures += o.lp_failures;
}

std::vector<double> hotel_bid_units(const std::vector<double>& marginal, double ask) {
  std::vector<double> out;
  for (double v : marginal) {
    if (v >= ask + 1.0) out.push_back(v);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double bid_set_value(const std::vector<double>& bids, const MarginalValues& mv, const std::vector<double>& y) {
  if (mv.values.size() != y.size()) throw std::invalid_argument("one sampled price per scenario");
  if (y.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t s = 0; s < y.size(); ++s) {
    const auto& v = mv.values[s];
    int won = 0;
    for (double b : bids) won += b >= y[s];
    won = std::min<int>(won, static_cast<int>(v.size()) - 1);
    total += v[won] - won * y[s];
  }
  return total / static_cast<double>(y.size());
}

bool maybe_replace_bid(const std::vector<double>& existing, const std::vector<double>& candidate,
                       const MarginalValues& mv, const std::vector<double>& y) {
  auto a = existing, b = candidate;
  std::sort(a.begin(), a.end(), std::greater<>());
  std::sort(b.begin(), b.end(), std::greater<>());
  if (a == b) return false;
  return bid_set_value(b, mv, y) > bid_set_value(a, mv, y) + 1e-9;
}

std::vector<int> partition_budget(int budget, int hotels) {
  if (hotels <= 0) return {};
  std::vector<int> out(hotels, budget / hotels);
  for (int i = 0; i < budget % hotels; ++i) ++out[i];
  return out;
}

AdaptiveAgent::AdaptiveAgent(int index, std::uint64_t seed, AgentConfig config,
                             std::shared_ptr<const PredictorResources> res, InvariantMonitor* monitor, std::string name)
    : index_(index),
      rng_(seed),
      config_(config),
      res_(std::move(res)),
      monitor_(monitor ? monitor : &own_monitor_),
      name_(std::move(name)) {
  config_.validate();
  if (!res_) throw std::invalid_argument("predictor resources required");
}

void AdaptiveAgent::load_clients(const Market& market) {
  if (!lp_) lp_ = std::make_unique<AllocationLp>(market.clients(index_));
}

void AdaptiveAgent::check_floor(double value, double floor) {
  ++monitor_->prediction_checks;
  if (value < floor - 1e-9) ++monitor_->prediction_floor_violations;
}

Scenario AdaptiveAgent::sample_scenario(const MarketSnapshot& s) {
  Scenario sc;
  sc.close = sample_closing_order(s, rng_);
  for (int r = 0; r < kNumHotels; ++r) {
    if (s.closed[r]) {
      sc.hotel_price[r] = s.close_price[r];
      continue;
    }
    const PricePrediction p = predict(config_.predictor, *res_, s, r, sc.close);
    sc.hotel_price[r] = p.sample(rng_);
    check_floor(sc.hotel_price[r], s.hotel_ask[r]);
  }
  return sc;
}

std::array<double, kNumHotels> AdaptiveAgent::expected_prices(const MarketSnapshot& s) {
  std::array<double, kNumHotels> out{};
  for (int k = 0; k < config_.expected_price_orders; ++k) {
    const CloseMinutes close = sample_closing_order(s, rng_);
    for (int r = 0; r < kNumHotels; ++r) {
      if (s.closed[r]) continue;
      const double m = predict(config_.predictor, *res_, s, r, close).mean();
      check_floor(m, s.hotel_ask[r]);
      out[r] += m / config_.expected_price_orders;
    }
  }
  for (int r = 0; r < kNumHotels; ++r) {
    if (s.closed[r]) out[r] = s.close_price[r];
  }
  return out;
}

PriceSchedule AdaptiveAgent::scenario_prices(const MarketSnapshot& s, const Scenario& sc) const {
  PriceSchedule y = unavailable_prices();
  for (int f = 0; f < kNumFlights; ++f) y[f] = GoodPrice{s.flight_ask[f], 1.0, config_.max_units};
  for (int r = 0; r < kNumHotels; ++r) {
    if (s.closed[r]) continue;
    y[room_to_good(r)] = GoodPrice{sc.hotel_price[r], config_.impact(r, sc.close[r]), config_.max_units};
  }
  return y;
}

GoodVector AdaptiveAgent::scenario_holdings(const Market& market, const Scenario& sc, int exclude_room) const {
  GoodVector h = market.holdings(index_);
  for (int r = 0; r < kNumHotels; ++r) {
    const int g = room_to_good(r);
    if (r == exclude_room || market.hotel_closed(g)) continue;
    for (double b : market.hotel_bids(index_, g)) h[g] += b >= sc.hotel_price[r];
  }
  return h;
}

double AdaptiveAgent::lp_value(const GoodVector& h, const PriceSchedule& y) {
  lp_->set_holdings(h);
  lp_->set_prices(y);
  return lp_->relaxation_value();
}

AllocationResult AdaptiveAgent::compute_gstar(const Market& market, const MarketSnapshot& s) {
  load_clients(market);
  const auto expected = expected_prices(s);
  int free_minutes = 0, minute_sum = 0;
  for (int m = 4; m <= 11; ++m) {
    bool used = false;
    for (int r = 0; r < kNumHotels; ++r) used |= s.closed[r] && s.close_minute[r] == m;
    if (!used) {
      ++free_minutes;
      minute_sum += m;
    }
  }
  const int mean_close = free_minutes ? (minute_sum + free_minutes / 2) / free_minutes : 11;
  PriceSchedule y = unavailable_prices();
  for (int f = 0; f < kNumFlights; ++f) y[f] = GoodPrice{s.flight_ask[f], 1.0, config_.max_units};
  for (int r = 0; r < kNumHotels; ++r) {
    if (!s.closed[r]) y[room_to_good(r)] = GoodPrice{expected[r], config_.impact(r, mean_close), config_.max_units};
  }
  lp_->set_holdings(market.holdings(index_));
  lp_->set_prices(y);
  return lp_->solve_exact();
}

double AdaptiveAgent::postponement_cost(int flight, int t) const {
  double total = 0.0;
  const Quote& latest = latest_quote_[flight];
  for (int j = 1; j <= config_.flight_lookahead; ++j) {
    const int T = std::min(kGameSeconds, t + 60 * j);
    total += flight_predict(res_->flight, first_quote_[flight], latest, T) - latest.ask;
  }
  return total / config_.flight_lookahead;
}

std::vector<double> AdaptiveAgent::postponement_benefit(const Market& market, const MarketSnapshot& s, int flight,
                                                        int n, const std::vector<Scenario>& scenarios) {
  load_clients(market);
  std::vector<double> benefit(n, 0.0);
  int used = 0;
  for (const Scenario& sc : scenarios) {
    const PriceSchedule y = scenario_prices(s, sc);
    const GoodVector base = scenario_holdings(market, sc, -1);
    std::vector<double> v(n + 1);
    try {
      for (int i = 0; i <= n; ++i) {
        GoodVector h = base;
        h[flight] += i;
        v[i] = lp_value(h, y) - i * s.flight_ask[flight];
      }
    } catch (const std::exception&) {
      ++monitor_->lp_failures;
      continue;
    }
    ++monitor_->flight_checks;
    for (int i = 1; i <= n; ++i) {
      if (!leq(v[i], v[i - 1])) {
        ++monitor_->flight_violations;
        break;
      }
    }
    for (int i = 1; i <= n; ++i) benefit[i - 1] += v[i - 1] - v[i];
    ++used;
  }
  if (used > 0) {
    for (double& b : benefit) b /= used;
  }
  return benefit;
}

MarginalValues AdaptiveAgent::hotel_marginal_values(const Market& market, const MarketSnapshot& s, int room,
                                                    const std::vector<Scenario>& scenarios) {
  load_clients(market);
  const int good = room_to_good(room);
  const int n = config_.max_units;
  MarginalValues mv;
  for (const Scenario& sc : scenarios) {
    PriceSchedule y = scenario_prices(s, sc);
    y[good].reset();
    const GoodVector base = scenario_holdings(market, sc, room);
    std::vector<double> v(n + 1);
    try {
      for (int i = 0; i <= n; ++i) {
        GoodVector h = base;
        h[good] += i;
        v[i] = lp_value(h, y);
      }
    } catch (const std::exception&) {
      ++monitor_->lp_failures;
      continue;
    }
    ++monitor_->hotel_checks;
    bool monotone = true, diminishing = true;
    for (int i = 1; i <= n; ++i) {
      monotone &= leq(v[i - 1], v[i]);
      if (i >= 2) diminishing &= leq(v[i] - v[i - 1], v[i - 1] - v[i - 2]);
    }
    monitor_->hotel_monotone_violations += !monotone;
    monitor_->hotel_diminishing_violations += !diminishing;
    mv.values.push_back(std::move(v));
  }
  mv.marginal.assign(n, 0.0);
  if (!mv.values.empty()) {
    for (const auto& v : mv.values) {
      for (int i = 1; i <= n; ++i) mv.marginal[i - 1] += v[i] - v[i - 1];
    }
    for (double& m : mv.marginal) m /= static_cast<double>(mv.values.size());
  }
  return mv;
}

void AdaptiveAgent::flight_step(Market& market, const MarketSnapshot& s, const AllocationResult& gstar,
                                bool last_minute) {
  if (last_minute) {
    for (int f = 0; f < kNumFlights; ++f) {
      if (gstar.purchases[f] > 0) market.buy_flight(index_, f, market.flight_ask(f), gstar.purchases[f]);
    }
    return;
  }
  std::vector<int> wanted;
  for (int f = 0; f < kNumFlights; ++f) {
    if (gstar.purchases[f] > 0) wanted.push_back(f);
  }
  if (wanted.empty()) return;
  std::vector<Scenario> scenarios;
  for (int i = 0; i < config_.flight_samples; ++i) scenarios.push_back(sample_scenario(s));
  for (int f : wanted) {
    const int n = gstar.purchases[f];
    const auto benefit = postponement_benefit(market, s, f, n, scenarios);
    const double cost = postponement_cost(f, market.time());
    int buy = 0;
    while (buy < n && cost >= benefit[buy] - 1e-6) ++buy;
    if (buy > 0) market.buy_flight(index_, f, market.flight_ask(f), buy);
  }
}

void AdaptiveAgent::hotel_step(Market& market, const MarketSnapshot& s) {
  std::vector<int> open;
  for (int r = 0; r < kNumHotels; ++r) {
    if (!s.closed[r]) open.push_back(r);
  }
  last_hotel_samples_.clear();
  if (open.empty()) return;
  const auto expected = expected_prices(s);
  std::stable_sort(open.begin(), open.end(), [&](int a, int b) { return expected[a] < expected[b]; });
  const auto budget = partition_budget(config_.hotel_samples, static_cast<int>(open.size()));
  last_hotel_samples_ = budget;
  for (std::size_t j = 0; j < open.size(); ++j) {
    if (budget[j] == 0) continue;
    const int room = open[j];
    const int good = room_to_good(room);
    std::vector<Scenario> scenarios;
    for (int i = 0; i < budget[j]; ++i) scenarios.push_back(sample_scenario(s));
    const MarginalValues mv = hotel_marginal_values(market, s, room, scenarios);
    if (mv.values.empty()) continue;
    std::vector<double> y;
    for (const Scenario& sc : scenarios) y.push_back(sc.hotel_price[room]);
    if (y.size() != mv.values.size()) continue;  // a scenario was dropped
    const double ask = market.hotel_ask(good);
    std::vector<double> candidate = hotel_bid_units(mv.marginal, ask);
    // Units currently winning cannot be given up; keep them at the lowest legal price.
    const int winning = market.hotel_units_winning(index_, good);
    while (static_cast<int>(candidate.size()) < winning) candidate.push_back(ask + 1.0);
    const auto existing = market.hotel_bids(index_, good);
    if (maybe_replace_bid(existing, candidate, mv, y)) market.bid_hotel(index_, good, candidate);
  }
}

void AdaptiveAgent::entertainment_step(Market& market, const MarketSnapshot& s) {
  load_clients(market);
  std::vector<Scenario> scenarios;
  for (int i = 0; i < config_.entertainment_samples; ++i) scenarios.push_back(sample_scenario(s));
  std::vector<PriceSchedule> prices;
  for (const Scenario& sc : scenarios) prices.push_back(scenario_prices(s, sc));
  const double margin = entertainment_margin(config_, market.time());
  for (int g = 16; g < kNumGoods; ++g) {
    market.withdraw_entertainment(index_, g, Side::kBuy);
    market.withdraw_entertainment(index_, g, Side::kSell);
  }

  // Values for goods first..end with the current holdings, scenario-major so
  // consecutive solves share a price schedule.
  constexpr int kEnt = kNumGoods - 16;
  std::array<double, kEnt> buy_value{}, sell_value{};
  std::array<int, kEnt> used{};
  auto evaluate = [&](int first) {
    const GoodVector held = market.holdings(index_);
    for (int g = first; g < kNumGoods; ++g) {
      buy_value[g - 16] = sell_value[g - 16] = 0.0;
      used[g - 16] = 0;
    }
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
      const GoodVector base = scenario_holdings(market, scenarios[k], -1);
      double v_n = 0.0;
      try {
        v_n = lp_value(base, prices[k]);
      } catch (const std::exception&) {
        ++monitor_->lp_failures;
        continue;
      }
      for (int g = first; g < kNumGoods; ++g) {
        const int n = held[g];
        double v_minus = 0.0, v_plus = 0.0;
        try {
          GoodVector h = base;
          h[g] = n + 1;
          v_plus = lp_value(h, prices[k]);
          if (n > 0) {
            h[g] = n - 1;
            v_minus = lp_value(h, prices[k]);
          }
        } catch (const std::exception&) {
          ++monitor_->lp_failures;
          continue;
        }
        ++monitor_->entertainment_checks;
        if (!leq(v_n, v_plus) || (n > 0 && !leq(v_minus, v_n))) ++monitor_->entertainment_violations;
        buy_value[g - 16] += v_plus - v_n;
        if (n > 0) sell_value[g - 16] += v_n - v_minus;
        ++used[g - 16];
      }
    }
  };

  evaluate(16);
  for (int g = 16; g < kNumGoods; ++g) {
    const int j = g - 16;
    if (used[j] == 0) continue;
    const GoodVector before = market.holdings(index_);
    const int n = before[g];
    const double bid = buy_value[j] / used[j] - margin;
    if (bid >= 1.0) market.order_entertainment(index_, g, Side::kBuy, std::floor(bid), 1);
    if (n > 0 && market.holdings(index_)[g] > 0) {
      market.order_entertainment(index_, g, Side::kSell, std::ceil(sell_value[j] / used[j] + margin), 1);
    }
    if (market.holdings(index_) != before && g + 1 < kNumGoods) evaluate(g + 1);
  }
}

void AdaptiveAgent::act(Market& market, int minute) {
  if (minute < 1 || minute > kGameMinutes) throw std::invalid_argument("minute out of range");
  load_clients(market);
  const int t = market.time();
  for (int f = 0; f < kNumFlights; ++f) {
    latest_quote_[f] = {t, market.flight_ask(f)};
    if (!seen_quotes_) first_quote_[f] = latest_quote_[f];
  }
  seen_quotes_ = true;
  const MarketSnapshot s = snapshot(market, minute);
  const bool hotel_minute = minute >= 4 && minute <= 11;
  if (minute == 1 || hotel_minute || minute == kGameMinutes) {
    const AllocationResult gstar = compute_gstar(market, s);
    flight_step(market, s, gstar, minute == kGameMinutes);
  }
  if (hotel_minute) hotel_step(market, snapshot(market, minute));
  entertainment_step(market, snapshot(market, minute));
}

EarlyBidder::EarlyBidder(int index, std::shared_ptr<const PredictorResources> res, std::string name,
                         bool price_impact)
    : index_(index), res_(std::move(res)), name_(std::move(name)), price_impact_(price_impact) {
  if (!res_) throw std::invalid_argument("predictor resources required");
}

void EarlyBidder::enable_entertainment(std::uint64_t seed, AgentConfig config, InvariantMonitor* monitor) {
  config.predictor = PredictorVariant::kSimpleEv;
  tickets_ = std::make_unique<AdaptiveAgent>(index_, seed, config, res_, monitor, name_);
}

void EarlyBidder::act(Market& market, int minute) {
  if (minute == 1 && actions_ == 0) commit(market, minute);
  if (tickets_) tickets_->entertainment_step(market, snapshot(market, minute));
}

void EarlyBidder::commit(Market& market, int minute) {
  ++actions_;
  const MarketSnapshot s = snapshot(market, minute);
  AgentConfig impact_config;
  impact_config.price_impact = price_impact_;
  PriceSchedule y = unavailable_prices();
  for (int f = 0; f < kNumFlights; ++f) y[f] = GoodPrice{s.flight_ask[f], 1.0, 8};
  for (int r = 0; r < kNumHotels; ++r) {
    if (s.closed[r]) continue;
    const double p = simple_mean(res_->table, s, r, true).mean();
    y[room_to_good(r)] = GoodPrice{p, impact_config.impact(r, 11), 8};
  }
  const AllocationResult gstar = opt(market.holdings(index_), y, market.clients(index_));
  for (int f = 0; f < kNumFlights; ++f) {
    if (gstar.purchases[f] > 0) market.buy_flight(index_, f, market.flight_ask(f), gstar.purchases[f]);
  }
  for (int r = 0; r < kNumHotels; ++r) {
    const int g = room_to_good(r);
    if (gstar.purchases[g] > 0) market.bid_hotel(index_, g, std::vector<double>(gstar.purchases[g], kEarlyBid));
  }
}

}  // namespace tac
