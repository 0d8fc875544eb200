#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "tac/record.hpp"
#include "test_support.hpp"

namespace tac {
namespace {

using testing::empty_resources;
using testing::fast_roster;

const GameResult& played_game() {
  static const GameResult g = run_game(fast_roster(4), empty_resources(), 5, 0);
  return g;
}

TEST(Record, GameCompletesAndSummarizes) {
  const GameResult& g = played_game();
  ASSERT_FALSE(g.voided) << g.error;
  const GameSummary& s = g.summary;
  EXPECT_TRUE(s.complete());
  EXPECT_EQ(s.num_agents, 4);
  std::set<int> minutes(s.close_minute.begin(), s.close_minute.end());
  EXPECT_EQ(minutes, (std::set<int>{4, 5, 6, 7, 8, 9, 10, 11}));
  ASSERT_EQ(s.scores.size(), 4u);
  for (const auto& sc : s.scores) EXPECT_NEAR(sc.utility - sc.score, sc.expenditure, 1e-9);
  for (int f = 0; f < kNumFlights; ++f) {
    ASSERT_FALSE(s.flight_quotes[f].empty());
    EXPECT_EQ(s.flight_quotes[f].front().t, 0);
    EXPECT_TRUE(std::is_sorted(s.flight_quotes[f].begin(), s.flight_quotes[f].end(),
                               [](const Quote& a, const Quote& b) { return a.t < b.t; }));
  }
}

TEST(Record, WriteReadRoundTrip) {
  const GameRecord& r = played_game().record;
  std::stringstream buf;
  write_record(buf, r);
  const GameRecord back = read_record(buf);
  EXPECT_EQ(back.header.dump(), r.header.dump());
  ASSERT_EQ(back.events.size(), r.events.size());
  for (std::size_t i = 0; i < r.events.size(); ++i) ASSERT_EQ(back.events[i].dump(), r.events[i].dump());
}

TEST(Record, RejectsForeignOrNewerFormat) {
  std::stringstream a("{\"format\":\"other\",\"version\":1}\n");
  EXPECT_THROW(read_record(a), std::invalid_argument);
  std::stringstream b("{\"format\":\"tac-game\",\"version\":99}\n");
  EXPECT_THROW(read_record(b), std::invalid_argument);
  std::stringstream c("");
  EXPECT_THROW(read_record(c), std::invalid_argument);
}

TEST(Record, LiveSnapshotMatchesReconstruction) {
  // Replay the logged actions and compare snapshots taken live at each
  // decision point with the ones rebuilt from the event log.
  const GameRecord& r = played_game().record;
  const GameSummary s = summarize(r.events);
  Market m(r.header.at("seed").get<std::uint64_t>(), 4);
  std::size_t next = 0;
  for (int k = 1; k <= kGameMinutes; ++k) {
    const int t = decision_time(k);
    for (; next < r.events.size(); ++next) {
      const auto& e = r.events[next];
      if (e.at("t").get<int>() >= t) break;
      const std::string type = e.at("type");
      if (type != "bid" && type != "withdraw") continue;
      m.advance_to(e.at("t").get<int>());
      const int agent = e.at("agent"), good = e.at("good");
      if (type == "withdraw") {
        m.withdraw_entertainment(agent, good, e.at("side") == "buy" ? Side::kBuy : Side::kSell);
      } else if (e.at("kind") == "flight") {
        m.buy_flight(agent, good, e.at("price"), e.at("qty"));
      } else if (e.at("kind") == "hotel") {
        m.bid_hotel(agent, good, e.at("units").get<std::vector<double>>());
      } else {
        m.order_entertainment(agent, good, e.at("side") == "buy" ? Side::kBuy : Side::kSell, e.at("price"),
                              e.at("qty"));
      }
    }
    m.advance_to(t);
    EXPECT_EQ(snapshot(m, k), snapshot_at(s, k)) << "minute " << k;
  }
}

TEST(Record, SnapshotAtHidesFutureCloses) {
  const GameSummary& s = played_game().summary;
  for (int k = 1; k <= kGameMinutes; ++k) {
    const MarketSnapshot snap = snapshot_at(s, k);
    int closed = 0;
    for (int r = 0; r < kNumHotels; ++r) {
      closed += snap.closed[r];
      if (snap.closed[r]) {
        EXPECT_LT(s.close_minute[r], k);
        EXPECT_EQ(snap.close_price[r], s.close_price[r]);
      } else {
        EXPECT_EQ(snap.close_minute[r], 0);
      }
    }
    EXPECT_EQ(closed, std::clamp(k - 4, 0, 8));
  }
}

TEST(Record, UntamperedRecordReplays) {
  const ReplayVerdict v = replay(played_game().record);
  EXPECT_TRUE(v.ok) << v.message << "\n" << v.expected << "\n" << v.actual;
  EXPECT_EQ(v.events_checked, played_game().record.events.size());
}

TEST(Record, MutatedTradePriceIsLocated) {
  GameRecord r = played_game().record;
  std::size_t target = r.events.size();
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    if (r.events[i].at("type") == "trade") {
      target = i;
      break;
    }
  }
  ASSERT_LT(target, r.events.size()) << "game had no trades";
  r.events[target]["price"] = r.events[target]["price"].get<double>() + 1.0;
  const ReplayVerdict v = replay(r);
  EXPECT_FALSE(v.ok);
  ASSERT_TRUE(v.first_mismatch.has_value());
  EXPECT_EQ(*v.first_mismatch, target);
  EXPECT_NE(v.expected, v.actual);
}

TEST(Record, MutatedActionIsDetected) {
  GameRecord r = played_game().record;
  for (auto& e : r.events) {
    if (e.at("type") == "bid" && e.at("kind") == "flight") {
      e["qty"] = e["qty"].get<int>() + 1;
      break;
    }
  }
  EXPECT_FALSE(replay(r).ok);
}

}  // namespace
}  // namespace tac
