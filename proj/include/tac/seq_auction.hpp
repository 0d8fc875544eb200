#pragma once

// Sequential single-unit auctions with known price distributions.
//
// Items 0..n-1 close in order. Before item i closes the bidder names a bid
// r_i; the closing price y_i is drawn from the item's distribution and the
// bidder wins (and pays y_i) iff r_i >= y_i. Holdings and purchase plans are
// bitmasks: bit j set means item j is held or bought.

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tac::seq {

using Mask = std::uint32_t;

inline constexpr double kUnavailable = std::numeric_limits<double>::infinity();
inline constexpr int kMaxItems = 20;

struct DiscreteDistribution {
  std::vector<std::pair<double, double>> points;  // (price, probability)

  static DiscreteDistribution point(double price) { return {{{price, 1.0}}}; }
  double mean() const;
  double min() const;
  double sample(std::mt19937_64& rng) const;
};

struct Problem {
  int n = 0;
  std::vector<DiscreteDistribution> prices;
  std::vector<double> utility;  // indexed by holdings mask, size 2^n

  // Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
  double v(Mask h) const { return utility[h]; }
};

class InstanceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PurchasePlan {
  Mask g = 0;
  double objective = 0.0;  // v(G + H) - G . Y
};

// Best purchase plan among items i..n-1 at fixed prices y (kUnavailable
// entries cannot be bought). Ties go to the lexicographically smallest plan.
PurchasePlan opt_purchases(const Problem& p, Mask h, int i, const std::vector<double>& y);

// Expected profit from item i on under optimal sequential bidding.
double exact_value(const Problem& p, int i, Mask h, std::size_t state_cap = std::size_t{1} << 22);

// Value with all later bid decisions moved inside the expectations,
// evaluated over every support combination of the remaining prices.
double value_est(const Problem& p, int i, Mask h, std::size_t sample_cap = std::size_t{1} << 20);

// Same, over `samples` random price vectors.
double value_est_sampled(const Problem& p, int i, Mask h, int samples, std::mt19937_64& rng);

// Same, with remaining prices replaced by their means.
double value_est_ev(const Problem& p, int i, Mask h);

struct MarginalBid {
  double bid = 0.0;
  std::vector<double> values;   // per-sample value of winning item i
  std::vector<double> weights;  // per-sample weight, summing to 1
};

// Average over sampled prices of the profit difference between winning and
// not winning item i.
MarginalBid marginal_bid(const Problem& p, int i, Mask h, int samples, std::mt19937_64& rng);

// Exact expectation over every support combination of items after i.
MarginalBid marginal_bid_exhaustive(const Problem& p, int i, Mask h,
                                    std::size_t sample_cap = std::size_t{1} << 20);

}  // namespace tac::seq
