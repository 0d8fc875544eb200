#pragma once

// Hotel and flight price beliefs built from game history.

#include <array>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tac/cde.hpp"
#include "tac/record.hpp"

namespace tac {

// Feature layout (version 1), 66 values:
//   0        minutes remaining
//   1..8     per room: current ask if open, close price if closed
//   9..16    per room: closing minute (sampled for open rooms)
//   17..24   per flight: current ask
//   25..32   per room: close price, Unknown while open
//   33..40   per room: open ask, Unknown once closed
//   41..48   per room: closing minute minus the target's closing minute
//   49..56   per room: minutes until close
//   57       number of players
//   58..65   participation bits
// Hotel asks are Unknown in the first minute, before any ask update.
inline constexpr int kFeatureVersion = 1;
inline constexpr int kNumFeatures = 66;

std::vector<std::string> feature_names();

using CloseMinutes = std::array<int, kNumHotels>;

std::vector<double> hotel_features(const MarketSnapshot& s, int target_room, const CloseMinutes& close);

// Maps a day-3 or day-4 target onto day 2 or day 1 by reversing the days of
// both hotel types and swapping inflight day d with outflight day 6 - d.
struct Canonical {
  MarketSnapshot snapshot;
  CloseMinutes close{};
  int room = 0;
};
int mirror_room(int room);
int mirror_flight(int flight);
Canonical canonicalize(const MarketSnapshot& s, int room, const CloseMinutes& close);

// Bank key 0..7: type * 4 + inner * 2 + later, for a canonical target.
int bank_key(int canonical_room, int minute);
std::string bank_key_name(int key);
inline constexpr int kNumBankKeys = 8;

// Uniform random assignment of the minutes not yet used by closed rooms to the
// open rooms. Closed rooms keep their actual minute.
CloseMinutes sample_closing_order(const MarketSnapshot& s, std::mt19937_64& rng);

// A predicted closing-price distribution, floored at the current price.
class PricePrediction {
 public:
  static PricePrediction point(double price, double floor);
  static PricePrediction empirical(std::shared_ptr<const std::vector<double>> prices, double floor);
  // current + max(0, increase) where the increase follows the model.
  static PricePrediction learned(const cde::CdeModel* model, std::vector<double> features, double current);

  double floor() const { return floor_; }
  double sample(std::mt19937_64& rng) const;
  double mean() const;

 private:
  enum class Kind { kPoint, kEmpirical, kLearned };
  Kind kind_ = Kind::kPoint;
  double floor_ = 0.0;
  double value_ = 0.0;
  std::shared_ptr<const std::vector<double>> prices_;
  const cde::CdeModel* model_ = nullptr;
  std::vector<double> features_;
};

class HotelModelBank {
 public:
  std::array<cde::CdeModel, kNumBankKeys> models;
  int version = 0;

  bool trained() const;
  void save(const std::string& dir) const;  // writes manifest.json and one file per key
  static HotelModelBank load(const std::string& dir);
};

// One labeled dataset per bank key.
std::array<cde::Dataset, kNumBankKeys> extract_training_set(const std::vector<GameSummary>& games);

struct BankTrainOptions {
  cde::TrainOptions cde;
  int min_examples = 20;  // keys with fewer examples stay untrained
};
HotelModelBank train_bank(const std::vector<GameSummary>& games, const BankTrainOptions& options, int version = 0);

struct HistoricalPriceTable {
  // [type][close minute - 4]
  std::array<std::array<std::shared_ptr<std::vector<double>>, kNumHotels>, 2> by_minute;
  std::array<std::shared_ptr<std::vector<double>>, 2> by_type;

  static HistoricalPriceTable build(const std::vector<GameSummary>& games);
  bool empty() const;
};

enum class PredictorVariant { kLearnedS, kLearnedEv, kCondlS, kCondlEv, kSimpleS, kSimpleEv, kCurrentBid };

std::string to_string(PredictorVariant v);
std::optional<PredictorVariant> parse_variant(const std::string& name);
bool is_ev(PredictorVariant v);

PricePrediction current_bid(const MarketSnapshot& s, int room);
PricePrediction simple_mean(const HistoricalPriceTable& table, const MarketSnapshot& s, int room, bool ev);
PricePrediction condl_mean(const HistoricalPriceTable& table, const MarketSnapshot& s, int room, int close_minute,
                           bool ev);
// Falls back to current_bid when the key's model is untrained.
PricePrediction predict_hotel(const HotelModelBank& bank, const MarketSnapshot& s, int room,
                              const CloseMinutes& close);

struct FlightPriceModel {
  double m = 0.0;
};

// Least squares through the origin of ask(t) - ask(0) on (t^2)(y - 10), with t
// as a fraction of the game.
FlightPriceModel flight_fit(const std::vector<GameSummary>& games);

// Expected ask at time T given the first and most recent observations; never
// below the latest ask.
double flight_predict(const FlightPriceModel& model, const Quote& first, const Quote& latest, int T);

// Shared, immutable predictor state handed to agents.
struct PredictorResources {
  HotelModelBank bank;
  HistoricalPriceTable table;
  FlightPriceModel flight;
  int version = 0;
};

// Prediction of the configured variant. Sampling variants draw from the
// distribution; ev variants return a point prediction at its mean.
PricePrediction predict(PredictorVariant variant, const PredictorResources& res, const MarketSnapshot& s, int room,
                        const CloseMinutes& close);

}  // namespace tac
