#include <gtest/gtest.h>

#include <map>
#include <set>

#include "tac/market.hpp"

namespace tac {
namespace {

int room_closing_at(const Market& m, int minute) {
  for (int r = 0; r < kNumHotels; ++r) {
    if (m.scheduled_close_minute(r) == minute) return r;
  }
  return -1;
}

TEST(Market, SameSeedSameGame) {
  Market a(42, 8), b(42, 8);
  a.advance_to(720);
  b.advance_to(720);
  ASSERT_EQ(a.events().size(), b.events().size());
  for (std::size_t i = 0; i < a.events().size(); ++i) EXPECT_EQ(a.events()[i].dump(), b.events()[i].dump());
  Market c(43, 8);
  EXPECT_NE(a.events()[0].dump(), c.events()[0].dump());
}

TEST(Market, PreferenceRangesAndEndowments) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Market m(seed, 8);
    for (int a = 0; a < 8; ++a) {
      for (const auto& c : m.clients(a)) {
        ASSERT_GE(c.hotel_premium, 50);
        ASSERT_LE(c.hotel_premium, 150);
        ASSERT_GE(c.arrival, 1);
        ASSERT_LT(c.arrival, c.departure);
        ASSERT_LE(c.departure, 5);
        for (int f : c.fun) ASSERT_TRUE(f >= 0 && f <= 200);
      }
      std::multiset<int> blocks;
      int total = 0;
      for (int g = 16; g < kNumGoods; ++g) {
        if (m.holdings(a)[g] > 0) blocks.insert(m.holdings(a)[g]);
        total += m.holdings(a)[g];
      }
      ASSERT_EQ(total, 12);
      ASSERT_EQ(blocks, (std::multiset<int>{2, 2, 4, 4}));
    }
  }
}

TEST(Market, OneCloseEachMinuteFourToEleven) {
  Market m(7, 2);
  std::set<int> minutes;
  for (int r = 0; r < kNumHotels; ++r) minutes.insert(m.scheduled_close_minute(r));
  EXPECT_EQ(minutes, (std::set<int>{4, 5, 6, 7, 8, 9, 10, 11}));
  for (int minute = 4; minute <= 11; ++minute) {
    m.advance_to(60 * minute - 1);
    const int r = room_closing_at(m, minute);
    EXPECT_FALSE(m.hotel_closed(room_to_good(r)));
    m.advance_to(60 * minute);
    EXPECT_TRUE(m.hotel_closed(room_to_good(r)));
    EXPECT_EQ(m.hotel_close_minute(room_to_good(r)), minute);
  }
  for (int r = 0; r < kNumHotels; ++r) EXPECT_TRUE(m.hotel_closed(room_to_good(r)));
}

TEST(Market, FlightTrajectoriesStayInRange) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Market m(seed, 1);
    m.advance_to(720);
    std::map<int, int> last_tick;
    for (const auto& e : m.events()) {
      if (e["type"] != "quote" || e["good"].get<int>() >= 8) continue;
      const double ask = e["ask"].get<double>();
      ASSERT_GE(ask, 150.0);
      ASSERT_LE(ask, 800.0);
      const int g = e["good"].get<int>();
      const int t = e["t"].get<int>();
      if (t == 0) {
        ASSERT_GE(ask, 250.0);
        ASSERT_LE(ask, 400.0);
      } else {
        const int gap = t - last_tick[g];
        ASSERT_GE(gap, 24);
        ASSERT_LE(gap, 32);
      }
      last_tick[g] = t;
    }
    for (int f = 0; f < 8; ++f) {
      ASSERT_GE(m.flight_hidden_y(f), 10.0);
      ASSERT_LE(m.flight_hidden_y(f), 90.0);
    }
  }
}

TEST(Market, FlightPurchases) {
  Market m(3, 2);
  const double ask = m.flight_ask(0);
  auto r = m.buy_flight(0, 0, ask - 1.0, 1);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, "below_ask");
  EXPECT_EQ(m.holdings(0)[0], 0);
  r = m.buy_flight(0, 0, ask + 100.0, 2);
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(m.holdings(0)[0], 2);
  EXPECT_DOUBLE_EQ(r.paid, 2 * ask);
  EXPECT_DOUBLE_EQ(m.expenditure(0), 2 * ask);
}

TEST(Market, HotelAskChangesOnlyOnTheMinute) {
  Market m(5, 2);
  const int good = room_to_good(room_closing_at(m, 11));
  m.advance_to(1);
  EXPECT_TRUE(m.bid_hotel(0, good, std::vector<double>(16, 200.0)).accepted);
  EXPECT_TRUE(m.bid_hotel(1, good, {250.0}).accepted);
  m.advance_to(59);
  EXPECT_EQ(m.hotel_ask(good), 0.0);
  m.advance_to(60);
  EXPECT_EQ(m.hotel_ask(good), 200.0);
}

TEST(Market, HotelCloseSixteenthPriceEarliestTieWins) {
  Market m(9, 3);
  const int room = room_closing_at(m, 4);
  const int good = room_to_good(room);
  m.advance_to(1);
  ASSERT_TRUE(m.bid_hotel(0, good, std::vector<double>(15, 300.0)).accepted);
  ASSERT_TRUE(m.bid_hotel(1, good, {150.0}).accepted);
  ASSERT_TRUE(m.bid_hotel(2, good, {150.0}).accepted);
  m.advance_to(240);
  ASSERT_TRUE(m.hotel_closed(good));
  EXPECT_EQ(*m.hotel_close_price(good), 150.0);
  EXPECT_EQ(m.holdings(0)[good], 15);
  EXPECT_EQ(m.holdings(1)[good], 1);
  EXPECT_EQ(m.holdings(2)[good], 0);
  EXPECT_DOUBLE_EQ(m.expenditure(0), 15 * 150.0);
  EXPECT_EQ(m.clearing_violations(), 0);
}

TEST(Market, SeventeenthUnitLoses) {
  Market m(9, 2);
  const int good = room_to_good(room_closing_at(m, 4));
  m.advance_to(1);
  ASSERT_TRUE(m.bid_hotel(0, good, std::vector<double>(14, 400.0)).accepted);
  ASSERT_TRUE(m.bid_hotel(1, good, {500.0, 120.0, 100.0}).accepted);
  m.advance_to(240);
  EXPECT_EQ(*m.hotel_close_price(good), 120.0);
  EXPECT_EQ(m.holdings(0)[good], 14);
  EXPECT_EQ(m.holdings(1)[good], 2);
}

TEST(Market, SixteenIdenticalBidsAllWin) {
  Market m(11, 4);
  const int good = room_to_good(room_closing_at(m, 4));
  m.advance_to(1);
  for (int a = 0; a < 4; ++a) ASSERT_TRUE(m.bid_hotel(a, good, std::vector<double>(4, 90.0)).accepted);
  m.advance_to(240);
  EXPECT_EQ(*m.hotel_close_price(good), 90.0);
  for (int a = 0; a < 4; ++a) EXPECT_EQ(m.holdings(a)[good], 4);
}

TEST(Market, FewerThanSixteenUnitsPayLowestBid) {
  Market m(11, 2);
  const int good = room_to_good(room_closing_at(m, 4));
  m.advance_to(1);
  ASSERT_TRUE(m.bid_hotel(0, good, {80.0, 30.0}).accepted);
  m.advance_to(240);
  EXPECT_EQ(*m.hotel_close_price(good), 30.0);
  EXPECT_EQ(m.holdings(0)[good], 2);
}

TEST(Market, BeatTheQuote) {
  Market m(13, 2);
  const int good = room_to_good(room_closing_at(m, 11));
  m.advance_to(1);
  ASSERT_TRUE(m.bid_hotel(0, good, std::vector<double>(16, 150.0)).accepted);
  m.advance_to(60);
  ASSERT_EQ(m.hotel_ask(good), 150.0);
  auto r = m.bid_hotel(1, good, {150.0});
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, "below_quote");
  EXPECT_TRUE(m.bid_hotel(1, good, {151.0}).accepted);
}

TEST(Market, ReplacementMayNotReduceUnitsWon) {
  Market m(13, 2);
  const int good = room_to_good(room_closing_at(m, 11));
  m.advance_to(1);
  ASSERT_TRUE(m.bid_hotel(1, good, std::vector<double>(13, 100.0)).accepted);
  ASSERT_TRUE(m.bid_hotel(0, good, {300.0, 300.0, 300.0}).accepted);
  EXPECT_EQ(m.hotel_units_winning(0, good), 3);
  auto r = m.bid_hotel(0, good, {300.0, 300.0});
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, "reduces_units_won");
  EXPECT_EQ(m.hotel_bids(0, good).size(), 3u);
  // Lowering to a price that still wins every unit is allowed.
  m.advance_to(60);
  ASSERT_EQ(m.hotel_ask(good), 100.0);
  EXPECT_TRUE(m.bid_hotel(0, good, {300.0, 300.0, 200.0}).accepted);
  EXPECT_EQ(m.hotel_units_winning(0, good), 3);
}

TEST(Market, ReplacementKeepsQueuePosition) {
  Market m(15, 3);
  const int good = room_to_good(room_closing_at(m, 4));
  m.advance_to(1);
  ASSERT_TRUE(m.bid_hotel(0, good, {150.0}).accepted);
  ASSERT_TRUE(m.bid_hotel(1, good, {150.0}).accepted);
  ASSERT_TRUE(m.bid_hotel(2, good, std::vector<double>(15, 300.0)).accepted);
  // Agent 0 adds a unit; its original 150 unit stays ahead of agent 1's.
  ASSERT_TRUE(m.bid_hotel(0, good, {150.0, 120.0}).accepted);
  m.advance_to(240);
  EXPECT_EQ(m.holdings(0)[good], 1);
  EXPECT_EQ(m.holdings(1)[good], 0);
}

TEST(Market, EntertainmentTradesAtRestingPrice) {
  Market m(17, 2);
  int good = -1;
  for (int g = 16; g < kNumGoods; ++g) {
    if (m.holdings(0)[g] > 0) good = g;
  }
  ASSERT_GE(good, 0);
  const int before0 = m.holdings(0)[good];
  const int before1 = m.holdings(1)[good];
  ASSERT_TRUE(m.order_entertainment(0, good, Side::kSell, 40.0, 1).accepted);
  auto r = m.order_entertainment(1, good, Side::kBuy, 35.0, 1);
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(r.filled, 0);
  EXPECT_EQ(*m.ent_best_bid(good), 35.0);
  m.withdraw_entertainment(1, good, Side::kBuy);
  EXPECT_FALSE(m.ent_best_bid(good).has_value());
  r = m.order_entertainment(1, good, Side::kBuy, 45.0, 1);
  EXPECT_EQ(r.filled, 1);
  EXPECT_DOUBLE_EQ(r.paid, 40.0);
  EXPECT_EQ(m.holdings(0)[good], before0 - 1);
  EXPECT_EQ(m.holdings(1)[good], before1 + 1);
  EXPECT_DOUBLE_EQ(m.expenditure(0), -40.0);
  EXPECT_DOUBLE_EQ(m.expenditure(1), 40.0);
}

TEST(Market, EntertainmentRejections) {
  Market m(17, 2);
  int good = -1;
  for (int g = 16; g < kNumGoods; ++g) {
    if (m.holdings(0)[g] == 0) good = g;
  }
  EXPECT_EQ(m.order_entertainment(0, good, Side::kSell, 10.0, 1).reason, "short_sale");
  int owned = -1;
  for (int g = 16; g < kNumGoods; ++g) {
    if (m.holdings(0)[g] == 2) owned = g;
  }
  ASSERT_TRUE(m.order_entertainment(0, owned, Side::kSell, 50.0, 2).accepted);
  EXPECT_EQ(m.order_entertainment(0, owned, Side::kSell, 50.0, 1).reason, "short_sale");
  EXPECT_EQ(m.order_entertainment(0, owned, Side::kBuy, 60.0, 1).reason, "self_cross");
  EXPECT_TRUE(m.order_entertainment(0, owned, Side::kBuy, 40.0, 1).accepted);
}

TEST(Market, ConservationOverRandomOrders) {
  Market m(19, 4);
  std::mt19937_64 rng(1);
  GoodVector total{};
  for (int a = 0; a < 4; ++a) total = total + m.holdings(a);
  for (int step = 0; step < 2000; ++step) {
    const int a = rng() % 4;
    const int g = 16 + rng() % 12;
    const Side side = rng() % 2 ? Side::kBuy : Side::kSell;
    m.order_entertainment(a, g, side, 20.0 + rng() % 60, 1 + rng() % 2);
    if (rng() % 5 == 0) m.withdraw_entertainment(a, g, side);
  }
  GoodVector after{};
  double cash = 0.0;
  for (int a = 0; a < 4; ++a) {
    after = after + m.holdings(a);
    cash += m.expenditure(a);
    for (int g = 16; g < kNumGoods; ++g) ASSERT_GE(m.holdings(a)[g], 0);
  }
  EXPECT_EQ(after, total);
  EXPECT_NEAR(cash, 0.0, 1e-6);
  for (int g = 16; g < kNumGoods; ++g) {
    if (m.ent_best_bid(g) && m.ent_best_ask(g)) EXPECT_LT(*m.ent_best_bid(g), *m.ent_best_ask(g));
  }
}

TEST(Market, FinalScoresAccounting) {
  Market m(21, 2);
  EXPECT_THROW(m.final_scores(), std::logic_error);
  m.buy_flight(0, 0, 1000.0, 1);
  m.advance_to(720);
  auto scores = m.final_scores();
  for (const auto& s : scores) EXPECT_DOUBLE_EQ(s.utility - s.score, s.expenditure);
  // Agent 1 holds only entertainment tickets and cannot form a package.
  EXPECT_EQ(scores[1].utility, 0.0);
  EXPECT_EQ(scores[1].score, 0.0);
  EXPECT_EQ(m.events().back()["type"], "score");
}

}  // namespace
}  // namespace tac
