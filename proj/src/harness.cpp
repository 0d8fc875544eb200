#include "tac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <thread>

#include "tac/random.hpp"

namespace tac {

namespace {

bool uses_learned(const std::vector<AgentSpec>& roster) {
  for (const auto& a : roster) {
    if (a.kind != AgentSpec::Kind::kAdaptive) continue;
    if (a.config.predictor == PredictorVariant::kLearnedEv || a.config.predictor == PredictorVariant::kLearnedS) {
      return true;
    }
  }
  return false;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

AgentSpec parse_agent_spec(const std::string& text) {
  std::string name, kind = text;
  const auto eq = text.find('=');
  if (eq != std::string::npos) {
    name = text.substr(0, eq);
    kind = text.substr(eq + 1);
  }
  AgentSpec spec;
  if (kind == "early_bidder") {
    spec.kind = AgentSpec::Kind::kEarlyBidder;
  } else {
    const auto v = parse_variant(kind);
    if (!v) throw ConfigError("unknown agent kind '" + kind + "'");
    spec.config.predictor = *v;
  }
  spec.name = name.empty() ? kind : name;
  return spec;
}

std::vector<AgentSpec> parse_roster(const std::string& comma_separated) {
  std::vector<AgentSpec> out;
  for (const auto& item : split(comma_separated, ',')) {
    if (item.empty()) throw ConfigError("empty roster entry");
    out.push_back(parse_agent_spec(item));
  }
  return out;
}

std::vector<std::string> agent_setting_keys() {
  return {"predictor",      "flight_lookahead", "hotel_samples",     "flight_samples",
          "entertainment_samples", "max_units", "margin_start",    "margin_end",
          "price_impact",   "c_early_cheap",    "c_early_expensive", "c_late_cheap",
          "c_late_expensive", "expected_price_orders", "entertainment_trading"};
}

void apply_agent_setting(AgentConfig& c, const std::string& key, const std::string& value) {
  auto as_int = [&] { return static_cast<int>(parse_int(key, value)); };
  if (key == "predictor") {
    const auto v = parse_variant(value);
    if (!v) throw ConfigError("predictor: unknown variant '" + value + "'");
    c.predictor = *v;
  } else if (key == "flight_lookahead") {
    c.flight_lookahead = as_int();
  } else if (key == "hotel_samples") {
    c.hotel_samples = as_int();
  } else if (key == "flight_samples") {
    c.flight_samples = as_int();
  } else if (key == "entertainment_samples") {
    c.entertainment_samples = as_int();
  } else if (key == "max_units") {
    c.max_units = as_int();
  } else if (key == "margin_start") {
    c.margin_start = parse_double(key, value);
  } else if (key == "margin_end") {
    c.margin_end = parse_double(key, value);
  } else if (key == "price_impact") {
    c.price_impact = parse_bool(key, value);
  } else if (key == "c_early_cheap") {
    c.c_early_cheap = parse_double(key, value);
  } else if (key == "c_early_expensive") {
    c.c_early_expensive = parse_double(key, value);
  } else if (key == "c_late_cheap") {
    c.c_late_cheap = parse_double(key, value);
  } else if (key == "c_late_expensive") {
    c.c_late_expensive = parse_double(key, value);
  } else if (key == "expected_price_orders") {
    c.expected_price_orders = as_int();
  } else if (key == "entertainment_trading") {
    c.entertainment_trading = parse_bool(key, value);
  } else {
    throw ConfigError("unknown agent setting '" + key + "'");
  }
}

void TournamentConfig::validate() const {
  if (roster.empty()) throw ConfigError("roster is empty");
  if (static_cast<int>(roster.size()) > kMaxAgents) throw ConfigError("roster exceeds 8 agents");
  if (game_count < 1) throw ConfigError("games must be at least 1");
  if (retrain_every < 0) throw ConfigError("retrain_every must be nonnegative");
  if (phase_games < 0) throw ConfigError("phase_games must be nonnegative");
  if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
  if (train.min_examples < 1 || train.cde.k < 1 || train.cde.rounds < 0) throw ConfigError("invalid training options");
  for (const auto& a : roster) {
    try {
      a.config.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(a.name + ": " + e.what());
    }
  }
}

TournamentConfig tournament_config_from(const KvConfig& kv) {
  static const std::vector<std::string> known = {"games",      "seed",     "retrain_every", "phase_games", "window",
                                                 "parallelism", "cde_k",   "cde_rounds",    "min_examples", "agent"};
  TournamentConfig c;
  c.game_count = static_cast<int>(kv.get_int("games", c.game_count));
  c.master_seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long>(c.master_seed)));
  c.retrain_every = static_cast<int>(kv.get_int("retrain_every", c.retrain_every));
  c.phase_games = static_cast<int>(kv.get_int("phase_games", c.phase_games));
  c.parallelism = static_cast<int>(kv.get_int("parallelism", c.parallelism));
  c.train.cde.k = static_cast<int>(kv.get_int("cde_k", c.train.cde.k));
  c.train.cde.rounds = static_cast<int>(kv.get_int("cde_rounds", c.train.cde.rounds));
  c.train.min_examples = static_cast<int>(kv.get_int("min_examples", c.train.min_examples));
  const std::string window = kv.get_string("window", "all");
  if (window == "all") {
    c.window = TrainingWindow::kAll;
  } else if (window == "previous_phases") {
    c.window = TrainingWindow::kPreviousPhases;
  } else {
    throw ConfigError("window: expected all or previous_phases");
  }
  for (const auto& spec : kv.get_all("agent")) c.roster.push_back(parse_agent_spec(spec));

  // Shared settings first, then per-name settings.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& e : kv.entries()) {
      if (std::find(known.begin(), known.end(), e.key) != known.end()) continue;
      const auto dot = e.key.find('.');
      if (dot == std::string::npos) throw ConfigError("line " + std::to_string(e.line) + ": unknown key " + e.key);
      const std::string scope = e.key.substr(0, dot), field = e.key.substr(dot + 1);
      if ((scope == "agent") != (pass == 0)) continue;
      bool matched = false;
      for (auto& a : c.roster) {
        if (scope == "agent" || a.name == scope) {
          apply_agent_setting(a.config, field, e.value);
          matched = true;
        }
      }
      if (!matched && scope != "agent") throw ConfigError("line " + std::to_string(e.line) + ": no agent " + scope);
    }
  }
  c.validate();
  return c;
}

std::uint64_t game_seed(std::uint64_t master_seed, std::uint64_t game_index) {
  return derive_seed(master_seed, 101, game_index);
}

std::uint64_t agent_seed(std::uint64_t seed, int agent) { return derive_seed(seed, 102, agent); }

GameResult run_game(const std::vector<AgentSpec>& roster, std::shared_ptr<const PredictorResources> res,
                    std::uint64_t master_seed, std::uint64_t game_index, const MarketConfig& market_config) {
  if (roster.empty() || static_cast<int>(roster.size()) > kMaxAgents) throw ConfigError("roster must have 1..8 agents");
  GameResult g;
  g.index = game_index;
  g.model_version = res->version;
  const std::uint64_t seed = game_seed(master_seed, game_index);
  Market m(seed, static_cast<int>(roster.size()), market_config);
  std::vector<std::unique_ptr<TradingAgent>> agents;
  for (const auto& spec : roster) g.agents.push_back(spec.name);
  try {
    for (std::size_t a = 0; a < roster.size(); ++a) {
      const auto& spec = roster[a];
      const int i = static_cast<int>(a);
      if (spec.kind == AgentSpec::Kind::kEarlyBidder) {
        auto e = std::make_unique<EarlyBidder>(i, res, spec.name, spec.config.price_impact);
        if (spec.config.entertainment_trading) e->enable_entertainment(agent_seed(seed, i), spec.config, &g.monitor);
        agents.push_back(std::move(e));
      } else {
        agents.push_back(
            std::make_unique<AdaptiveAgent>(i, agent_seed(seed, i), spec.config, res, &g.monitor, spec.name));
      }
    }
    for (int k = 1; k <= kGameMinutes; ++k) {
      m.advance_to(decision_time(k));
      for (auto& agent : agents) agent->act(m, k);
    }
    m.advance_to(kGameSeconds);
    m.final_scores();
  } catch (const std::exception& e) {
    g.voided = true;
    g.error = e.what();
  }
  g.clearing_violations = m.clearing_violations();
  g.record.header = make_header(m, g.agents, game_index, res->version);
  g.record.events = m.events();
  if (!g.voided) {
    g.summary = summarize(g.record.events);
    g.summary.seed = seed;
  }
  return g;
}

PredictorResources build_resources(const std::vector<GameSummary>& games, const BankTrainOptions& options,
                                   bool train_learned, int version) {
  PredictorResources r;
  r.version = version;
  r.table = HistoricalPriceTable::build(games);
  r.flight = flight_fit(games);
  if (train_learned) r.bank = train_bank(games, options, version);
  r.bank.version = version;
  return r;
}

TournamentResult run_tournament(const TournamentConfig& config, std::shared_ptr<const PredictorResources> initial,
                                const std::vector<GameSummary>& corpus, const TournamentOptions& options) {
  config.validate();
  if (!initial) throw std::invalid_argument("initial predictor resources required");
  TournamentResult out;
  out.versions.push_back(initial);
  auto current = initial;
  const bool learned = uses_learned(config.roster);
  auto phase_of = [&](int i) { return config.phase_games > 0 ? i / config.phase_games : 0; };

  int start = 0;
  while (start < config.game_count) {
    const int end = config.retrain_every > 0 ? std::min(config.game_count, start + config.retrain_every)
                                             : config.game_count;
    std::vector<GameResult> batch(end - start);
    std::atomic<int> next{start};
    auto worker = [&] {
      for (int i = next++; i < end; i = next++) {
        batch[i - start] = run_game(config.roster, current, config.master_seed, i, config.market);
      }
    };
    const int threads = std::min(config.parallelism, end - start);
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (auto& g : batch) {
      if (!g.voided) out.monitor.merge(g.monitor);
      out.clearing_violations += g.clearing_violations;
      out.voided += g.voided;
      if (options.on_game) options.on_game(g);
      if (!options.keep_records) g.record = {};
      out.games.push_back(std::move(g));
    }
    start = end;

    if (config.retrain_every > 0 && start < config.game_count) {
      std::vector<GameSummary> window = corpus;
      const int phase = phase_of(start);
      for (const auto& g : out.games) {
        if (g.voided) continue;
        if (config.window == TrainingWindow::kPreviousPhases && phase_of(static_cast<int>(g.index)) >= phase) continue;
        window.push_back(g.summary);
      }
      const int version = current->version + 1;
      current = std::make_shared<const PredictorResources>(build_resources(window, config.train, learned, version));
      out.versions.push_back(current);
      if (options.on_retrain) options.on_retrain(*current);
    }
  }
  return out;
}

const PredictorResources& TournamentResult::resources_for(const GameResult& g) const {
  for (const auto& v : versions) {
    if (v->version == g.model_version) return *v;
  }
  throw std::out_of_range("no resources for model version " + std::to_string(g.model_version));
}

double t_quantile_975(int df) {
  static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                     2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                     2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return std::numeric_limits<double>::infinity();
  if (df <= 30) return table[df - 1];
  // Cornish-Fisher expansion around the normal quantile.
  const double z = 1.959963984540054, n = df;
  const double z3 = z * z * z, z5 = z3 * z * z, z7 = z5 * z * z;
  return z + (z3 + z) / (4 * n) + (5 * z5 + 16 * z3 + 3 * z) / (96 * n * n) +
         (3 * z7 + 19 * z5 + 17 * z3 - 15 * z) / (384 * n * n * n);
}

Estimate estimate(const std::vector<double>& xs) {
  Estimate e;
  e.n = static_cast<int>(xs.size());
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / e.n;
  if (e.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.se = std::sqrt(ss / (e.n - 1)) / std::sqrt(static_cast<double>(e.n));
  }
  return e;
}

GameScores game_scores(const GameResult& g) { return {g.agents, g.summary.scores}; }

GameScores game_scores(const GameRecord& r) {
  GameScores s;
  s.agents = r.header.at("agents").get<std::vector<std::string>>();
  s.scores = summarize(r.events).scores;
  return s;
}

MetricsReport score_report(const std::vector<GameScores>& games, int voided) {
  MetricsReport r;
  r.voided = voided;
  std::vector<std::string> names;
  struct Series {
    std::vector<double> score, relative, utility, expenditure;
  };
  std::map<std::string, Series> series;
  std::vector<std::map<std::string, double>> game_means;
  for (const auto& g : games) {
    if (g.scores.size() != g.agents.size() || g.scores.empty()) {
      throw std::invalid_argument("game without one score per agent");
    }
    ++r.games;
    double total = 0.0;
    for (const auto& s : g.scores) total += s.score;
    const double mean = total / static_cast<double>(g.scores.size());
    std::map<std::string, std::array<double, 5>> acc;  // score, relative, utility, expenditure, copies
    for (std::size_t a = 0; a < g.agents.size(); ++a) {
      const auto& s = g.scores[a];
      if (std::find(names.begin(), names.end(), g.agents[a]) == names.end()) names.push_back(g.agents[a]);
      auto& x = acc[g.agents[a]];
      x[0] += s.score;
      x[1] += s.score - mean;
      x[2] += s.utility;
      x[3] += s.expenditure;
      x[4] += 1.0;
    }
    std::map<std::string, double> means;
    for (const auto& [name, x] : acc) {
      auto& ser = series[name];
      ser.score.push_back(x[0] / x[4]);
      ser.relative.push_back(x[1] / x[4]);
      ser.utility.push_back(x[2] / x[4]);
      ser.expenditure.push_back(x[3] / x[4]);
      means[name] = x[0] / x[4];
    }
    game_means.push_back(std::move(means));
  }
  for (const auto& name : names) {
    const auto& ser = series[name];
    r.agents.push_back({name, estimate(ser.score), estimate(ser.relative), estimate(ser.utility),
                        estimate(ser.expenditure)});
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      std::vector<double> diff;
      for (const auto& m : game_means) {
        const auto a = m.find(names[i]), b = m.find(names[j]);
        if (a != m.end() && b != m.end()) diff.push_back(a->second - b->second);
      }
      PairMetrics p;
      p.a = names[i];
      p.b = names[j];
      p.diff = estimate(diff);
      const double half = p.diff.n > 1 ? t_quantile_975(p.diff.n - 1) * p.diff.se : 0.0;
      p.ci_low = p.diff.mean - half;
      p.ci_high = p.diff.mean + half;
      r.pairs.push_back(p);
    }
  }
  return r;
}

const AgentMetrics* find_agent(const MetricsReport& r, const std::string& name) {
  for (const auto& a : r.agents) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

void write_report_csv(std::ostream& out, const MetricsReport& r) {
  out << "agent,games,mean_score,se_score,mean_relative,se_relative,mean_utility,se_utility,mean_expenditure,"
         "se_expenditure\n";
  for (const auto& a : r.agents) {
    out << a.name << ',' << a.score.n << ',' << a.score.mean << ',' << a.score.se << ',' << a.relative.mean << ','
        << a.relative.se << ',' << a.utility.mean << ',' << a.utility.se << ',' << a.expenditure.mean << ','
        << a.expenditure.se << '\n';
  }
}

void write_pairs_csv(std::ostream& out, const MetricsReport& r) {
  out << "agent_a,agent_b,games,mean_diff,se_diff,ci_low,ci_high\n";
  for (const auto& p : r.pairs) {
    out << p.a << ',' << p.b << ',' << p.diff.n << ',' << p.diff.mean << ',' << p.diff.se << ',' << p.ci_low << ','
        << p.ci_high << '\n';
  }
}

double point_prediction(PredictorVariant variant, const PredictorResources& res, const MarketSnapshot& s, int room,
                        int orders, std::mt19937_64& rng) {
  if (!is_ev(variant)) throw std::invalid_argument("point predictions need an ev variant");
  if (orders < 1) throw std::invalid_argument("orders must be at least 1");
  const bool order_free = variant == PredictorVariant::kCurrentBid || variant == PredictorVariant::kSimpleEv;
  if (order_free) orders = 1;
  double total = 0.0;
  for (int i = 0; i < orders; ++i) {
    const CloseMinutes close = sample_closing_order(s, rng);
    total += predict(variant, res, s, room, close).mean();
  }
  return total / orders;
}

std::vector<double> prediction_squared_errors(const GameSummary& game, PredictorVariant variant,
                                              const PredictorResources& res, std::uint64_t seed, int orders) {
  if (!game.complete()) throw std::invalid_argument("game is incomplete");
  std::mt19937_64 rng(derive_seed(seed, game.seed));
  std::vector<double> out;
  for (int k = 1; k < kGameMinutes; ++k) {
    const MarketSnapshot s = snapshot_at(game, k);
    for (int r = 0; r < kNumHotels; ++r) {
      if (s.closed[r]) continue;
      const double e = point_prediction(variant, res, s, r, orders, rng) - game.close_price[r];
      out.push_back(e * e);
    }
  }
  return out;
}

double eval_predictor_rmse(const std::vector<GameSummary>& games, PredictorVariant variant,
                           const PredictorResources& res, std::uint64_t seed, int orders) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& g : games) {
    for (double e : prediction_squared_errors(g, variant, res, seed, orders)) {
      total += e;
      ++n;
    }
  }
  return n ? std::sqrt(total / static_cast<double>(n)) : 0.0;
}

std::vector<std::string> record_paths(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<std::string> out;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::recursive_directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".jsonl") out.push_back(e.path().string());
    }
    std::sort(out.begin(), out.end());
  } else if (fs::is_regular_file(path)) {
    out.push_back(path);
  } else {
    throw std::runtime_error("no such file or directory: " + path);
  }
  return out;
}

std::vector<GameSummary> load_summaries(const std::string& path) {
  std::vector<GameSummary> out;
  for (const auto& p : record_paths(path)) {
    const GameRecord r = read_record_file(p);
    GameSummary s = summarize(r.events);
    s.seed = r.header.at("seed").get<std::uint64_t>();
    if (s.complete()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tac
