#pragma once

// Seeded games and tournaments, periodic retraining, and evaluation metrics.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tac/agent.hpp"
#include "tac/kv_config.hpp"
#include "tac/predictors.hpp"
#include "tac/record.hpp"

namespace tac {

struct AgentSpec {
  enum class Kind { kAdaptive, kEarlyBidder };
  std::string name;
  Kind kind = Kind::kAdaptive;
  AgentConfig config;
};

// "variant", "name=variant", "early_bidder" or "name=early_bidder".
AgentSpec parse_agent_spec(const std::string& text);
std::vector<AgentSpec> parse_roster(const std::string& comma_separated);

// Sets one AgentConfig field by its config-file key; throws ConfigError.
void apply_agent_setting(AgentConfig& config, const std::string& key, const std::string& value);
std::vector<std::string> agent_setting_keys();

enum class TrainingWindow { kAll, kPreviousPhases };

struct TournamentConfig {
  std::vector<AgentSpec> roster;
  int game_count = 1;
  std::uint64_t master_seed = 1;
  int retrain_every = 25;  // games; 0 = never
  int phase_games = 0;     // games per phase; 0 = a single phase
  TrainingWindow window = TrainingWindow::kAll;
  int parallelism = 1;
  BankTrainOptions train;
  MarketConfig market;

  void validate() const;  // throws ConfigError
};

// Keys: games, seed, retrain_every, phase_games, window (all |
// previous_phases), parallelism, cde_k, cde_rounds, min_examples, and
// repeated `agent = spec` lines. `agent.<key>` applies to every adaptive
// agent, `<name>.<key>` to one.
TournamentConfig tournament_config_from(const KvConfig& kv);

std::uint64_t game_seed(std::uint64_t master_seed, std::uint64_t game_index);
std::uint64_t agent_seed(std::uint64_t game_seed, int agent);

struct GameResult {
  std::uint64_t index = 0;
  int model_version = 0;
  GameRecord record;
  GameSummary summary;
  std::vector<std::string> agents;
  InvariantMonitor monitor;
  int clearing_violations = 0;
  bool voided = false;
  std::string error;
};

GameResult run_game(const std::vector<AgentSpec>& roster, std::shared_ptr<const PredictorResources> res,
                    std::uint64_t master_seed, std::uint64_t game_index, const MarketConfig& market = {});

// History-derived predictor state. The bank is trained only when requested.
PredictorResources build_resources(const std::vector<GameSummary>& games, const BankTrainOptions& options,
                                   bool train_learned, int version);

struct TournamentResult {
  std::vector<GameResult> games;  // records are dropped unless keep_records
  std::vector<std::shared_ptr<const PredictorResources>> versions;  // in training order
  InvariantMonitor monitor;
  int clearing_violations = 0;
  int voided = 0;

  // The resources a game was played with.
  const PredictorResources& resources_for(const GameResult& g) const;
};

struct TournamentOptions {
  bool keep_records = false;
  std::function<void(const GameResult&)> on_game;  // called in game order
  std::function<void(const PredictorResources&)> on_retrain;
};

// Retrained versions number up from initial->version; `corpus` seeds every
// training window.
TournamentResult run_tournament(const TournamentConfig& config, std::shared_ptr<const PredictorResources> initial,
                                const std::vector<GameSummary>& corpus, const TournamentOptions& options = {});

// Two-sided 95% Student t quantile.
double t_quantile_975(int df);

struct Estimate {
  int n = 0;
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n)
};
Estimate estimate(const std::vector<double>& xs);

struct GameScores {
  std::vector<std::string> agents;
  std::vector<AgentScore> scores;
};
GameScores game_scores(const GameResult& g);
GameScores game_scores(const GameRecord& r);

struct AgentMetrics {
  std::string name;
  Estimate score;
  Estimate relative;
  Estimate utility;
  Estimate expenditure;
};

struct PairMetrics {
  std::string a, b;
  Estimate diff;  // per-game score of a minus score of b
  double ci_low = 0.0, ci_high = 0.0;
};

struct MetricsReport {
  int games = 0;
  int voided = 0;
  std::vector<AgentMetrics> agents;  // by first appearance
  std::vector<PairMetrics> pairs;
};

// Copies of one agent name within a game are averaged first, so each game is
// one observation per name.
MetricsReport score_report(const std::vector<GameScores>& games, int voided = 0);
const AgentMetrics* find_agent(const MetricsReport& r, const std::string& name);

// Columns: agent,games,mean_score,se_score,mean_relative,se_relative,
// mean_utility,se_utility,mean_expenditure,se_expenditure
void write_report_csv(std::ostream& out, const MetricsReport& r);
// Columns: agent_a,agent_b,games,mean_diff,se_diff,ci_low,ci_high
void write_pairs_csv(std::ostream& out, const MetricsReport& r);

// Point prediction of an ev variant at one snapshot, averaging the predicted
// mean over `orders` sampled closing orders.
double point_prediction(PredictorVariant variant, const PredictorResources& res, const MarketSnapshot& s, int room,
                        int orders, std::mt19937_64& rng);

// Squared errors of every (minute, open room) prediction in one game against
// the realized closing prices, minutes 1..11.
std::vector<double> prediction_squared_errors(const GameSummary& game, PredictorVariant variant,
                                              const PredictorResources& res, std::uint64_t seed, int orders = 8);

double eval_predictor_rmse(const std::vector<GameSummary>& games, PredictorVariant variant,
                           const PredictorResources& res, std::uint64_t seed = 1, int orders = 8);

// Every *.jsonl file under a directory, or a single file.
std::vector<std::string> record_paths(const std::string& path);
// Summaries of the complete games among record_paths(path).
std::vector<GameSummary> load_summaries(const std::string& path);

}  // namespace tac
