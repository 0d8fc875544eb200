#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "tac/harness.hpp"
#include "test_support.hpp"

namespace tac {
namespace {

using testing::empty_resources;
using testing::fast_agent;
using testing::fast_roster;

TEST(KvConfig, ParsesCommentsRepeatsAndTypes) {
  const KvConfig kv = KvConfig::parse_string(
      "# comment\n"
      "games = 12\n"
      "\n"
      "agent = a=current_bid   # trailing\n"
      "agent = early_bidder\n"
      "ratio=0.5\n"
      "flag = yes\n"
      "games = 13\n");
  EXPECT_EQ(kv.get_int("games", 0), 13);
  EXPECT_EQ(kv.get_all("agent"), (std::vector<std::string>{"a=current_bid", "early_bidder"}));
  EXPECT_DOUBLE_EQ(kv.get_double("ratio", 0), 0.5);
  EXPECT_TRUE(kv.get_bool("flag", false));
  EXPECT_EQ(kv.get_string("missing", "x"), "x");
  EXPECT_THROW(KvConfig::parse_string("no equals sign\n"), ConfigError);
  EXPECT_THROW(KvConfig::parse_string("= 3\n"), ConfigError);
  EXPECT_THROW(KvConfig::parse_string("n = 3x\n").get_int("n", 0), ConfigError);
}

TEST(TournamentConfig, RosterAndOverrides) {
  const auto c = tournament_config_from(KvConfig::parse_string(
      "games = 4\nseed = 9\nretrain_every = 2\nwindow = previous_phases\nphase_games = 2\n"
      "agent = alice=learned_ev\nagent = bob=current_bid\nagent = early_bidder\n"
      "agent.hotel_samples = 6\nbob.hotel_samples = 3\nalice.flight_lookahead = 4\n"));
  ASSERT_EQ(c.roster.size(), 3u);
  EXPECT_EQ(c.game_count, 4);
  EXPECT_EQ(c.master_seed, 9u);
  EXPECT_EQ(c.window, TrainingWindow::kPreviousPhases);
  EXPECT_EQ(c.roster[0].config.predictor, PredictorVariant::kLearnedEv);
  EXPECT_EQ(c.roster[0].config.hotel_samples, 6);
  EXPECT_EQ(c.roster[0].config.flight_lookahead, 4);
  EXPECT_EQ(c.roster[1].config.hotel_samples, 3);
  EXPECT_EQ(c.roster[2].kind, AgentSpec::Kind::kEarlyBidder);
  EXPECT_EQ(c.retrain_every, 2);
}

TEST(TournamentConfig, InvalidConfigsAreRejected) {
  auto parse = [](const std::string& text) { return tournament_config_from(KvConfig::parse_string(text)); };
  EXPECT_THROW(parse("games = 1\n"), ConfigError);  // empty roster
  EXPECT_THROW(parse("agent = current_bid\ngames = 0\n"), ConfigError);
  EXPECT_THROW(parse("agent = nonsense\n"), ConfigError);
  EXPECT_THROW(parse("agent = current_bid\nagent.hotel_samples = 0\n"), ConfigError);
  EXPECT_THROW(parse("agent = current_bid\ncarol.max_units = 3\n"), ConfigError);
  EXPECT_THROW(parse("agent = current_bid\nwindow = sometimes\n"), ConfigError);
  EXPECT_THROW(parse("agent = current_bid\nunknown = 1\n"), ConfigError);
  std::string nine;
  for (int i = 0; i < 9; ++i) nine += "agent = current_bid\n";
  EXPECT_THROW(parse(nine), ConfigError);
}

TEST(Metrics, TwoAgentRelativeScores) {
  GameScores g{{"x", "y"}, {{1000, 900, 100}, {800, 900, -100}}};
  const MetricsReport r = score_report({g});
  ASSERT_EQ(r.agents.size(), 2u);
  EXPECT_DOUBLE_EQ(find_agent(r, "x")->relative.mean, 100);
  EXPECT_DOUBLE_EQ(find_agent(r, "y")->relative.mean, -100);
  EXPECT_DOUBLE_EQ(find_agent(r, "x")->utility.mean - find_agent(r, "x")->score.mean,
                   find_agent(r, "x")->expenditure.mean);
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_DOUBLE_EQ(r.pairs[0].diff.mean, 200);
}

TEST(Metrics, CopiesAreAveragedPerGame) {
  GameScores g{{"e", "e", "a"}, {{0, 10, -10}, {0, 30, -30}, {0, 0, 40}}};
  const MetricsReport r = score_report({g, g});
  EXPECT_EQ(find_agent(r, "e")->score.n, 2);
  EXPECT_DOUBLE_EQ(find_agent(r, "e")->score.mean, -20);
  EXPECT_DOUBLE_EQ(find_agent(r, "e")->score.se, 0);
  EXPECT_DOUBLE_EQ(find_agent(r, "a")->relative.mean, 40);
}

TEST(Metrics, StandardErrorShrinksAsRootN) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 100.0);
  auto se_for = [&](int n) {
    std::vector<GameScores> games;
    for (int i = 0; i < n; ++i) {
      const double s = d(rng);
      games.push_back({{"p", "q"}, {{s, 0, s}, {-s, 0, -s}}});
    }
    return find_agent(score_report(games), "p")->score.se;
  };
  const double small = se_for(400), large = se_for(6400);
  EXPECT_NEAR(small / large, 4.0, 0.6);
}

TEST(Metrics, TQuantile) {
  EXPECT_DOUBLE_EQ(t_quantile_975(1), 12.706);
  EXPECT_DOUBLE_EQ(t_quantile_975(30), 2.042);
  EXPECT_NEAR(t_quantile_975(40), 2.021, 1e-3);
  EXPECT_NEAR(t_quantile_975(100), 1.984, 1e-3);
  EXPECT_NEAR(t_quantile_975(1000000), 1.960, 1e-3);
  EXPECT_GT(t_quantile_975(31), t_quantile_975(32));
}

TEST(Metrics, CsvHeaders) {
  GameScores g{{"x", "y"}, {{1, 0, 1}, {0, 0, 0}}};
  std::ostringstream a, b;
  write_report_csv(a, score_report({g}));
  write_pairs_csv(b, score_report({g}));
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "agent,games,mean_score,se_score,mean_relative,se_relative,mean_utility,se_utility,mean_expenditure,"
            "se_expenditure");
  EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "agent_a,agent_b,games,mean_diff,se_diff,ci_low,ci_high");
}

TEST(Rmse, CurrentBidOnStaticPricesIsZero) {
  GameSummary g;
  g.seed = 1;
  g.num_agents = 8;
  for (int f = 0; f < kNumFlights; ++f) g.flight_quotes[f] = {{0, 300.0}};
  for (int r = 0; r < kNumHotels; ++r) {
    g.closed[r] = true;
    g.close_minute[r] = 4 + r;
    g.close_price[r] = 40 + r;
    for (int m = 0; m <= g.close_minute[r]; ++m) g.hotel_quotes[r].push_back({60 * m, 40.0 + r});
  }
  EXPECT_DOUBLE_EQ(eval_predictor_rmse({g}, PredictorVariant::kCurrentBid, PredictorResources{}), 0.0);
  EXPECT_EQ(prediction_squared_errors(g, PredictorVariant::kCurrentBid, PredictorResources{}, 1).size(),
            60u);
  EXPECT_THROW(eval_predictor_rmse({g}, PredictorVariant::kLearnedS, PredictorResources{}), std::invalid_argument);
}

TEST(Games, InvalidAgentVoidsTheGame) {
  auto roster = fast_roster(2);
  roster[1].config.hotel_samples = 0;
  const GameResult g = run_game(roster, empty_resources(), 1, 0);
  EXPECT_TRUE(g.voided);
  EXPECT_FALSE(g.error.empty());
}

TournamentConfig small_tournament(int games, int parallelism) {
  TournamentConfig c;
  c.roster = fast_roster(3);
  c.roster.push_back(fast_agent(PredictorVariant::kSimpleEv, "simple"));
  c.game_count = games;
  c.master_seed = 5;
  c.retrain_every = 2;
  c.parallelism = parallelism;
  return c;
}

TEST(Tournament, SameSeedSameRecordsAnyParallelism) {
  TournamentOptions keep;
  keep.keep_records = true;
  const auto a = run_tournament(small_tournament(3, 1), empty_resources(), {}, keep);
  const auto b = run_tournament(small_tournament(3, 2), empty_resources(), {}, keep);
  ASSERT_EQ(a.games.size(), 3u);
  ASSERT_EQ(b.games.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.games[i].index, i);
    ASSERT_EQ(a.games[i].record.events.size(), b.games[i].record.events.size());
    for (std::size_t j = 0; j < a.games[i].record.events.size(); ++j) {
      ASSERT_EQ(a.games[i].record.events[j].dump(), b.games[i].record.events[j].dump());
    }
  }
  // Retrained between games 1 and 2; game 2 used version 1.
  EXPECT_EQ(a.versions.size(), 2u);
  EXPECT_EQ(a.games[1].model_version, 0);
  EXPECT_EQ(a.games[2].model_version, 1);
  EXPECT_EQ(a.games[2].record.header.at("model_version"), 1);
  EXPECT_EQ(a.clearing_violations, 0);
  EXPECT_EQ(a.monitor.violations(), 0);

  std::vector<GameScores> scores;
  for (const auto& g : a.games) scores.push_back(game_scores(g));
  const MetricsReport r = score_report(scores);
  double rel = 0.0;
  for (const auto& s : scores) {
    double mean = 0.0;
    for (const auto& x : s.scores) mean += x.score / s.scores.size();
    for (const auto& x : s.scores) {
      rel += x.score - mean;
      EXPECT_NEAR(x.utility - x.score, x.expenditure, 1e-9);
    }
  }
  EXPECT_NEAR(rel, 0.0, 1e-6);
  EXPECT_EQ(r.games, 3);
}

TEST(Tournament, PreviousPhasesWindowExcludesCurrentPhase) {
  TournamentConfig c = small_tournament(6, 1);
  c.roster = fast_roster(2);
  c.retrain_every = 2;
  c.phase_games = 4;
  c.window = TrainingWindow::kPreviousPhases;
  std::vector<std::size_t> window_games;
  TournamentOptions o;
  o.on_retrain = [&](const PredictorResources& r) {
    window_games.push_back(r.table.by_type[0] ? r.table.by_type[0]->size() / 4 : 0);
  };
  run_tournament(c, empty_resources(), {}, o);
  // Retrains before games 2 and 4: phase 0 has no predecessor, then phase 0's
  // four games.
  EXPECT_EQ(window_games, (std::vector<std::size_t>{0, 4}));

  c.window = TrainingWindow::kAll;
  window_games.clear();
  run_tournament(c, empty_resources(), {}, o);
  EXPECT_EQ(window_games, (std::vector<std::size_t>{2, 4}));
}

TEST(Roster, ParsesSpecs) {
  const auto r = parse_roster("current_bid, me=learned_s,early_bidder");
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].name, "current_bid");
  EXPECT_EQ(r[1].name, "me");
  EXPECT_EQ(r[1].config.predictor, PredictorVariant::kLearnedS);
  EXPECT_EQ(r[2].kind, AgentSpec::Kind::kEarlyBidder);
  EXPECT_THROW(parse_roster("current_bid,,x"), ConfigError);
  AgentConfig c;
  for (const auto& k : agent_setting_keys()) {
    const bool flag = k == "price_impact" || k == "entertainment_trading";
    EXPECT_NO_THROW(apply_agent_setting(c, k, k == "predictor" ? "simple_s" : flag ? "false" : "2"));
  }
  EXPECT_FALSE(c.entertainment_trading);
  EXPECT_THROW(apply_agent_setting(c, "nope", "1"), ConfigError);
}

}  // namespace
}  // namespace tac
