#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "tac/predictors.hpp"
#include "test_support.hpp"

namespace tac {
namespace {

constexpr int TT = 0, SS = 4;  // room index of night 1 for each type

MarketSnapshot open_snapshot(int minute) {
  MarketSnapshot s;
  s.minute = minute;
  s.num_players = 8;
  for (int f = 0; f < kNumFlights; ++f) s.flight_ask[f] = 300 + 10 * f;
  for (int r = 0; r < kNumHotels; ++r) s.hotel_ask[r] = 20 + 5 * r;
  return s;
}

CloseMinutes identity_close() { return {4, 5, 6, 7, 8, 9, 10, 11}; }

// A complete synthetic game whose asks never move after the first quote.
GameSummary flat_game(std::uint64_t seed, const std::array<double, kNumHotels>& price) {
  GameSummary g;
  g.seed = seed;
  g.num_agents = 8;
  for (int f = 0; f < kNumFlights; ++f) {
    g.flight_y[f] = 10;
    g.flight_quotes[f] = {{0, 300.0}};
  }
  for (int r = 0; r < kNumHotels; ++r) {
    g.close_minute[r] = 4 + r;
    g.close_price[r] = price[r];
    g.closed[r] = true;
    for (int m = 1; m <= g.close_minute[r]; ++m) g.hotel_quotes[r].push_back({60 * m, price[r]});
  }
  return g;
}

TEST(Canonical, MirrorMapsDayFourToDayOne) {
  EXPECT_EQ(room_night(mirror_room(TT + 3)), 1);
  EXPECT_EQ(mirror_room(TT + 3), TT);
  EXPECT_EQ(mirror_room(SS + 2), SS + 1);
  for (int r = 0; r < kNumHotels; ++r) EXPECT_EQ(mirror_room(mirror_room(r)), r);
  for (int f = 0; f < kNumFlights; ++f) EXPECT_EQ(mirror_flight(mirror_flight(f)), f);
}

TEST(Canonical, TampaDayFourBecomesDayOneWithRemappedFeatures) {
  MarketSnapshot s = open_snapshot(5);
  s.closed[SS + 3] = true;
  s.close_minute[SS + 3] = 4;
  s.close_price[SS + 3] = 77;
  const CloseMinutes close = {5, 6, 7, 8, 9, 10, 11, 4};
  const Canonical c = canonicalize(s, TT + 3, close);
  EXPECT_EQ(c.room, TT);
  EXPECT_EQ(c.snapshot.hotel_ask[TT], s.hotel_ask[TT + 3]);
  EXPECT_EQ(c.snapshot.hotel_ask[TT + 3], s.hotel_ask[TT]);
  EXPECT_TRUE(c.snapshot.closed[SS]);
  EXPECT_EQ(c.snapshot.close_price[SS], 77);
  EXPECT_EQ(c.close[SS], 4);
  EXPECT_EQ(c.close[TT], close[TT + 3]);
  for (int f = 0; f < kNumFlights; ++f) EXPECT_EQ(c.snapshot.flight_ask[7 - f], s.flight_ask[f]);
  const auto x = hotel_features(c.snapshot, c.room, c.close);
  EXPECT_EQ(x[1 + TT], s.hotel_ask[TT + 3]);
}

TEST(Canonical, ShantiesDayTwoUnchangedAndIdempotent) {
  const MarketSnapshot s = open_snapshot(3);
  const Canonical c = canonicalize(s, SS + 1, identity_close());
  EXPECT_EQ(c.room, SS + 1);
  EXPECT_EQ(c.snapshot, s);
  EXPECT_EQ(c.close, identity_close());
  for (int r = 0; r < kNumHotels; ++r) {
    const Canonical once = canonicalize(s, r, identity_close());
    const Canonical twice = canonicalize(once.snapshot, once.room, once.close);
    EXPECT_EQ(twice.snapshot, once.snapshot);
    EXPECT_EQ(twice.room, once.room);
    EXPECT_EQ(twice.close, once.close);
  }
}

TEST(Features, LayoutAndUnknowns) {
  EXPECT_EQ(feature_names().size(), static_cast<std::size_t>(kNumFeatures));
  const auto first = hotel_features(open_snapshot(1), TT, identity_close());
  ASSERT_EQ(first.size(), static_cast<std::size_t>(kNumFeatures));
  EXPECT_EQ(first[0], 12);
  for (int r = 0; r < kNumHotels; ++r) {
    EXPECT_TRUE(cde::is_unknown(first[1 + r]));   // no ask yet
    EXPECT_TRUE(cde::is_unknown(first[25 + r]));  // nothing closed
    EXPECT_TRUE(cde::is_unknown(first[33 + r]));
  }
  MarketSnapshot s = open_snapshot(6);
  s.closed[2] = true;
  s.close_price[2] = 99;
  s.close_minute[2] = 5;
  const auto x = hotel_features(s, 1, identity_close());
  EXPECT_EQ(x[1 + 2], 99);
  EXPECT_EQ(x[25 + 2], 99);
  EXPECT_TRUE(cde::is_unknown(x[33 + 2]));
  EXPECT_EQ(x[33 + 1], s.hotel_ask[1]);
  EXPECT_EQ(x[41 + 3], identity_close()[3] - identity_close()[1]);
  EXPECT_EQ(x[49 + 4], identity_close()[4] - 5);
  EXPECT_EQ(x[57], 8);
}

TEST(Features, BankKeysCoverEightModels) {
  std::set<int> keys;
  for (int r : {0, 1, 4, 5}) {
    for (int m : {1, 2}) keys.insert(bank_key(r, m));
  }
  EXPECT_EQ(keys.size(), 8u);
  EXPECT_THROW(bank_key(3, 1), std::invalid_argument);
  EXPECT_EQ(bank_key_name(bank_key(TT, 1)), "TT_outer_first");
  EXPECT_EQ(bank_key_name(bank_key(SS + 1, 7)), "SS_inner_later");
}

TEST(TrainingSet, FirstMinuteAndPostCloseRows) {
  std::array<double, kNumHotels> price{};
  for (int r = 0; r < kNumHotels; ++r) price[r] = 100 + r;
  const auto sets = extract_training_set({flat_game(1, price)});
  std::size_t first = 0, total = 0;
  for (int k = 0; k < kNumBankKeys; ++k) {
    total += sets[k].size();
    if (k % 2 == 0) first += sets[k].size();
  }
  EXPECT_EQ(first, 8u);
  // Room r closes at minute 4 + r and is open at minutes 1..4 + r.
  std::size_t expected = 0;
  for (int r = 0; r < kNumHotels; ++r) expected += std::min(11, 4 + r);
  EXPECT_EQ(total, expected);
  for (const auto& d : sets) {
    for (double y : d.labels) EXPECT_GE(y, 0.0);
  }
}

TEST(ClosingOrder, UniformFirstSlot) {
  const MarketSnapshot s = open_snapshot(4);
  std::mt19937_64 rng(3);
  std::map<int, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_closing_order(s, rng)[0]];
  ASSERT_EQ(counts.size(), 8u);
  double chi2 = 0.0;
  for (const auto& [m, c] : counts) chi2 += (c - n / 8.0) * (c - n / 8.0) / (n / 8.0);
  EXPECT_LT(chi2, 24.32);  // chi-square(7) at 0.001
}

TEST(ClosingOrder, ClosedRoomsKeepMinuteAndSingleOpenIsForced) {
  MarketSnapshot s = open_snapshot(11);
  for (int r = 0; r < kNumHotels; ++r) {
    if (r == 5) continue;
    s.closed[r] = true;
    s.close_minute[r] = r < 5 ? 4 + r : 3 + r;
  }
  std::mt19937_64 rng(1);
  const CloseMinutes c = sample_closing_order(s, rng);
  EXPECT_EQ(c[5], 11);
  for (int r = 0; r < kNumHotels; ++r) {
    if (r != 5) EXPECT_EQ(c[r], s.close_minute[r]);
  }
  std::mt19937_64 a(9), b(9);
  const MarketSnapshot t = open_snapshot(2);
  EXPECT_EQ(sample_closing_order(t, a), sample_closing_order(t, b));
}

TEST(Baselines, CurrentBidAndSimpleMean) {
  MarketSnapshot s = open_snapshot(5);
  s.hotel_ask[TT] = 240;
  EXPECT_EQ(current_bid(s, TT).mean(), 240);
  HistoricalPriceTable table;
  table.by_type[0] = std::make_shared<std::vector<double>>(std::vector<double>{100, 200});
  s.hotel_ask[TT] = 50;
  EXPECT_EQ(simple_mean(table, s, TT, true).mean(), 150);
  s.hotel_ask[TT] = 180;
  EXPECT_EQ(simple_mean(table, s, TT, true).mean(), 180);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) EXPECT_GE(simple_mean(table, s, TT, false).sample(rng), 180);
  // No history for Shoreline Shanties: fall back to the current ask.
  EXPECT_EQ(simple_mean(table, s, SS, true).mean(), s.hotel_ask[SS]);
  EXPECT_EQ(condl_mean(table, s, TT, 6, true).mean(), 180);
}

TEST(Learned, ZeroIncreaseModelPredictsCurrentPrice) {
  cde::Dataset d;
  d.feature_names = feature_names();
  std::mt19937_64 rng(4);
  for (int i = 0; i < 60; ++i) {
    auto s = open_snapshot(2 + i % 9);
    d.add(hotel_features(s, TT, identity_close()), -static_cast<double>(1 + i % 5));
  }
  HotelModelBank bank;
  cde::TrainOptions o;
  o.k = 3;
  o.rounds = 5;
  bank.models[bank_key(TT, 2)] = cde::train(d, o).model;
  const MarketSnapshot s = open_snapshot(4);
  const auto p = predict_hotel(bank, s, TT, identity_close());
  EXPECT_DOUBLE_EQ(p.mean(), s.hotel_ask[TT]);
  for (int i = 0; i < 200; ++i) EXPECT_DOUBLE_EQ(p.sample(rng), s.hotel_ask[TT]);
}

TEST(Learned, SamplesNeverBelowCurrentAndSeedReproducible) {
  cde::Dataset d;
  d.feature_names = feature_names();
  std::mt19937_64 gen(5);
  std::normal_distribution<double> noise(0.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    auto s = open_snapshot(2 + i % 9);
    s.hotel_ask[TT] = 20 + i % 40;
    d.add(hotel_features(s, TT, identity_close()), noise(gen) + 10);
  }
  HotelModelBank bank;
  cde::TrainOptions o;
  o.k = 8;
  o.rounds = 30;
  bank.models[bank_key(TT, 2)] = cde::train(d, o).model;
  const MarketSnapshot s = open_snapshot(4);
  const auto p = predict_hotel(bank, s, TT, identity_close());
  EXPECT_GE(p.mean(), s.hotel_ask[TT]);
  std::mt19937_64 a(7), b(7);
  for (int i = 0; i < 500; ++i) {
    const double x = p.sample(a);
    EXPECT_GE(x, s.hotel_ask[TT]);
    EXPECT_EQ(x, p.sample(b));
  }
}

TEST(Learned, UntrainedKeyFallsBackToCurrentBid) {
  const MarketSnapshot s = open_snapshot(3);
  const auto p = predict_hotel(HotelModelBank{}, s, SS + 2, identity_close());
  EXPECT_EQ(p.mean(), s.hotel_ask[SS + 2]);
}

TEST(Learned, BankSaveLoadRoundTrip) {
  std::array<double, kNumHotels> price{};
  std::vector<GameSummary> games;
  std::mt19937_64 rng(8);
  for (int g = 0; g < 30; ++g) {
    for (int r = 0; r < kNumHotels; ++r) price[r] = 50 + static_cast<double>(rng() % 200);
    games.push_back(flat_game(g, price));
  }
  BankTrainOptions o;
  o.cde.k = 4;
  o.cde.rounds = 10;
  o.min_examples = 5;
  const HotelModelBank bank = train_bank(games, o, 3);
  const std::string dir = ::testing::TempDir() + "/bank_round_trip";
  bank.save(dir);
  const HotelModelBank back = HotelModelBank::load(dir);
  EXPECT_EQ(back.version, 3);
  const MarketSnapshot s = open_snapshot(5);
  for (int r = 0; r < kNumHotels; ++r) {
    EXPECT_DOUBLE_EQ(predict_hotel(back, s, r, identity_close()).mean(),
                     predict_hotel(bank, s, r, identity_close()).mean());
  }
}

TEST(Flights, ZeroModelAndFlatFlight) {
  const Quote first{0, 300}, latest{120, 320};
  EXPECT_EQ(flight_predict({0.0}, first, latest, 600), 320);
  // Ask has not moved: estimated y = 10, so no predicted increase.
  EXPECT_EQ(flight_predict({6.4}, {0, 300}, {120, 300}, 600), 300);
  // Falling ask: y is clamped to 10 and the prediction stays at the latest ask.
  EXPECT_EQ(flight_predict({6.4}, {0, 300}, {120, 250}, 600), 250);
}

TEST(Flights, SyntheticTrajectoryIsExact) {
  const double m = 7.5;
  std::vector<GameSummary> games;
  for (int g = 0; g < 3; ++g) {
    GameSummary s;
    for (int f = 0; f < kNumFlights; ++f) {
      s.flight_y[f] = 10 + 10 * f + g;
      for (int t = 0; t <= kGameSeconds; t += 15) {
        const double tau = t / 720.0;
        s.flight_quotes[f].push_back({t, 250 + f + m * tau * tau * (s.flight_y[f] - 10)});
      }
    }
    games.push_back(s);
  }
  const FlightPriceModel fit = flight_fit(games);
  EXPECT_NEAR(fit.m, m, 1e-9);
  const auto& q = games[1].flight_quotes[5];
  for (std::size_t i = 1; i + 1 < q.size(); ++i) {
    for (std::size_t j = i + 1; j < q.size(); ++j) {
      EXPECT_NEAR(flight_predict(fit, q[0], q[i], q[j].t), q[j].ask, 1e-6);
    }
  }
}

TEST(Flights, FitOnSimulatedGamesIsPositive) {
  std::vector<GameSummary> games;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Market m(seed, 1);
    m.advance_to(kGameSeconds);
    m.final_scores();
    games.push_back(summarize(m.events()));
  }
  const double fitted = flight_fit(games).m;
  EXPECT_GT(fitted, 3.0);
  EXPECT_LT(fitted, 10.0);
}

TEST(Variants, NamesRoundTripAndEvFlags) {
  for (auto v : {PredictorVariant::kLearnedS, PredictorVariant::kLearnedEv, PredictorVariant::kCondlS,
                 PredictorVariant::kCondlEv, PredictorVariant::kSimpleS, PredictorVariant::kSimpleEv,
                 PredictorVariant::kCurrentBid}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_FALSE(parse_variant("bogus"));
  EXPECT_TRUE(is_ev(PredictorVariant::kLearnedEv));
  EXPECT_FALSE(is_ev(PredictorVariant::kLearnedS));
}

}  // namespace
}  // namespace tac
