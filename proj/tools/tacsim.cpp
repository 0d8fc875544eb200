// tacsim: simulate games, run tournaments, train and evaluate predictors,
// replay records.
//
// Exit codes: 0 success, 1 invalid configuration or input, 2 verification
// failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "tac/harness.hpp"

namespace fs = std::filesystem;
using namespace tac;

namespace {

struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::shared_ptr<const PredictorResources> load_resources(const std::string& logs, const std::string& models) {
  std::vector<GameSummary> history;
  if (!logs.empty()) history = load_summaries(logs);
  PredictorResources res = build_resources(history, {}, false, 0);
  if (!models.empty()) {
    res.bank = HotelModelBank::load(models);
    res.version = res.bank.version;
  }
  return std::make_shared<const PredictorResources>(std::move(res));
}

void apply_agent_file(std::vector<AgentSpec>& roster, const std::string& path) {
  if (path.empty()) return;
  const KvConfig kv = KvConfig::load(path);
  for (auto& a : roster) {
    for (const auto& e : kv.entries()) apply_agent_setting(a.config, e.key, e.value);
    try {
      a.config.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(a.name + ": " + e.what());
    }
  }
}

void print_report(const MetricsReport& r) {
  std::printf("%-16s %6s %10s %8s %10s %8s %10s %10s\n", "agent", "games", "score", "se", "relative", "se",
              "utility", "cost");
  for (const auto& a : r.agents) {
    std::printf("%-16s %6d %10.1f %8.1f %10.1f %8.1f %10.1f %10.1f\n", a.name.c_str(), a.score.n, a.score.mean,
                a.score.se, a.relative.mean, a.relative.se, a.utility.mean, a.expenditure.mean);
  }
  if (r.voided) std::printf("voided games: %d\n", r.voided);
}

int cmd_simulate(std::uint64_t seed, std::uint64_t index, const std::string& roster_text, const std::string& out,
                 const std::string& logs, const std::string& models, const std::string& agent_file) {
  auto roster = parse_roster(roster_text);
  if (roster.empty() || roster.size() > static_cast<std::size_t>(kMaxAgents)) {
    throw ConfigError("roster must have 1..8 agents");
  }
  apply_agent_file(roster, agent_file);
  const auto res = load_resources(logs, models);
  const GameResult g = run_game(roster, res, seed, index);
  if (!out.empty()) write_record_file(out, g.record);
  if (g.voided) {
    std::fprintf(stderr, "game voided: %s\n", g.error.c_str());
    return 1;
  }
  print_report(score_report({game_scores(g)}));
  std::printf("invariant violations: %ld, clearing violations: %d\n", g.monitor.violations(), g.clearing_violations);
  return 0;
}

int cmd_tournament(const std::string& config_path, const std::string& out_dir, const std::string& logs,
                   const std::string& models) {
  const TournamentConfig config = tournament_config_from(KvConfig::load(config_path));
  const auto initial = load_resources(logs, models);
  std::vector<GameSummary> corpus;
  if (!logs.empty()) corpus = load_summaries(logs);
  fs::create_directories(fs::path(out_dir) / "games");

  TournamentOptions options;
  options.on_game = [&](const GameResult& g) {
    char name[32];
    std::snprintf(name, sizeof name, "game_%05llu.jsonl", static_cast<unsigned long long>(g.index));
    write_record_file((fs::path(out_dir) / "games" / name).string(), g.record);
    std::fprintf(stderr, "game %llu%s\n", static_cast<unsigned long long>(g.index), g.voided ? " voided" : "");
  };
  options.on_retrain = [&](const PredictorResources& r) {
    if (r.bank.trained()) r.bank.save((fs::path(out_dir) / "models" / ("v" + std::to_string(r.version))).string());
    std::fprintf(stderr, "retrained: model version %d\n", r.version);
  };
  const TournamentResult result = run_tournament(config, initial, corpus, options);

  std::vector<GameScores> scores;
  for (const auto& g : result.games) {
    if (!g.voided) scores.push_back(game_scores(g));
  }
  const MetricsReport report = score_report(scores, result.voided);
  {
    std::ofstream out(fs::path(out_dir) / "report.csv");
    write_report_csv(out, report);
    std::ofstream pairs(fs::path(out_dir) / "pairs.csv");
    write_pairs_csv(pairs, report);
  }

  // Each game is scored against the models its agents used.
  std::vector<PredictorVariant> variants = {PredictorVariant::kCurrentBid};
  for (const auto& a : config.roster) {
    const auto v = a.config.predictor;
    if (a.kind == AgentSpec::Kind::kAdaptive && is_ev(v) &&
        std::find(variants.begin(), variants.end(), v) == variants.end()) {
      variants.push_back(v);
    }
  }
  std::ofstream rmse(fs::path(out_dir) / "rmse.csv");
  rmse << "variant,events,rmse\n";
  for (auto v : variants) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& g : result.games) {
      if (g.voided) continue;
      for (double e : prediction_squared_errors(g.summary, v, result.resources_for(g), config.master_seed)) {
        total += e;
        ++n;
      }
    }
    rmse << to_string(v) << ',' << n << ',' << (n ? std::sqrt(total / n) : 0.0) << '\n';
  }

  print_report(report);
  const auto& m = result.monitor;
  std::printf("invariant checks: hotel %ld, flight %ld, entertainment %ld, prediction %ld\n", m.hotel_checks,
              m.flight_checks, m.entertainment_checks, m.prediction_checks);
  std::printf("violations: %ld, clearing violations: %d, lp failures: %ld\n", m.violations(),
              result.clearing_violations, m.lp_failures);
  return 0;
}

int cmd_train(const std::string& logs, int k, int rounds, int min_examples, const std::string& out) {
  const auto games = load_summaries(logs);
  if (games.empty()) throw ConfigError("no complete games under " + logs);
  BankTrainOptions options;
  options.cde.k = k;
  options.cde.rounds = rounds;
  options.min_examples = min_examples;
  if (k < 1 || rounds < 0 || min_examples < 1) throw ConfigError("invalid training options");
  const auto sets = extract_training_set(games);
  const HotelModelBank bank = train_bank(games, options, 1);
  bank.save(out);
  for (int key = 0; key < kNumBankKeys; ++key) {
    std::printf("%-24s %6zu examples %s\n", bank_key_name(key).c_str(), sets[key].size(),
                bank.models[key].empty() ? "untrained" : "trained");
  }
  return 0;
}

int cmd_eval(const std::string& logs, const std::string& variant_name, const std::string& models,
             const std::string& history, int orders, std::uint64_t seed) {
  const auto v = parse_variant(variant_name);
  if (!v) throw ConfigError("unknown variant " + variant_name);
  if (!is_ev(*v)) throw ConfigError("eval-predictor needs an ev variant");
  const auto games = load_summaries(logs);
  const auto res = load_resources(history, models);
  std::size_t events = 0;
  for (const auto& g : games) events += prediction_squared_errors(g, *v, *res, seed, orders).size();
  std::printf("%s rmse %.4f over %zu predictions in %zu games\n", variant_name.c_str(),
              eval_predictor_rmse(games, *v, *res, seed, orders), events, games.size());
  return 0;
}

int cmd_extract(const std::string& logs, const std::string& out) {
  const auto games = load_summaries(logs);
  const auto sets = extract_training_set(games);
  fs::create_directories(out);
  for (int key = 0; key < kNumBankKeys; ++key) {
    cde::write_csv_file((fs::path(out) / (bank_key_name(key) + ".csv")).string(), sets[key]);
    std::printf("%-24s %6zu examples\n", bank_key_name(key).c_str(), sets[key].size());
  }
  return 0;
}

int cmd_replay(const std::string& path) {
  const ReplayVerdict v = replay(read_record_file(path));
  if (v.ok) {
    std::printf("ok: %zu events identical\n", v.events_checked);
    return 0;
  }
  std::printf("mismatch: %s\n", v.message.c_str());
  if (v.first_mismatch) {
    std::printf("  recorded:    %s\n  regenerated: %s\n", v.expected.c_str(), v.actual.c_str());
  }
  throw VerificationFailure("replay mismatch");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trading-agent market simulator and experiment runner"};
  app.require_subcommand(1);

  std::uint64_t seed = 1, index = 0;
  std::string roster = "current_bid,current_bid,current_bid,current_bid,current_bid,current_bid,current_bid,current_bid";
  std::string out, logs, models, agent_file, history, config, record, variant = "learned_ev";
  int k = 50, rounds = 300, min_examples = 20, orders = 8;

  auto* sim = app.add_subcommand("simulate", "Play one game");
  sim->add_option("--seed", seed, "Master seed");
  sim->add_option("--index", index, "Game index");
  sim->add_option("--roster", roster, "Comma-separated agents: variant, name=variant or early_bidder");
  sim->add_option("--out", out, "Record output path (JSON Lines)");
  sim->add_option("--logs", logs, "Past game records for history-based predictors");
  sim->add_option("--models", models, "Trained model bank directory");
  sim->add_option("--agent-config", agent_file, "Agent settings file");

  auto* tour = app.add_subcommand("tournament", "Run a tournament");
  tour->add_option("--config", config, "Tournament config file")->required();
  tour->add_option("--out-dir", out, "Output directory")->required();
  tour->add_option("--logs", logs, "Initial training corpus");
  tour->add_option("--models", models, "Initial model bank directory");

  auto* train = app.add_subcommand("train", "Train a hotel model bank");
  train->add_option("--logs", logs, "Game records")->required();
  train->add_option("--k", k, "Interior breakpoints");
  train->add_option("--rounds", rounds, "Boosting rounds");
  train->add_option("--min-examples", min_examples, "Minimum examples per key");
  train->add_option("--out", out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval-predictor", "RMSE of an ev predictor on game records");
  eval->add_option("--logs", logs, "Evaluation records")->required();
  eval->add_option("--variant", variant, "Predictor variant");
  eval->add_option("--models", models, "Model bank directory");
  eval->add_option("--history", history, "Records for history-based predictors");
  eval->add_option("--orders", orders, "Closing orders averaged per prediction");
  eval->add_option("--seed", seed, "Seed for sampled closing orders");

  auto* extract = app.add_subcommand("extract-features", "Write per-key training CSVs");
  extract->add_option("--logs", logs, "Game records")->required();
  extract->add_option("--out", out, "Output directory")->required();

  auto* rep = app.add_subcommand("replay", "Verify a record by re-simulation");
  rep->add_option("--record", record, "Record file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*sim) return cmd_simulate(seed, index, roster, out, logs, models, agent_file);
    if (*tour) return cmd_tournament(config, out, logs, models);
    if (*train) return cmd_train(logs, k, rounds, min_examples, out);
    if (*eval) return cmd_eval(logs, variant, models, history, orders, seed);
    if (*extract) return cmd_extract(logs, out);
    if (*rep) return cmd_replay(record);
  } catch (const VerificationFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
