#include "tac/seq_auction.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace tac::seq {
namespace {

struct Branch {
  double weight;
  double price;  // y_i in this sample
  double win;    // profit after winning item i, excluding y_i
  double lose;   // profit after losing item i
};

// Lexicographic order on plans read as (g_0, ..., g_{n-1}).
bool lex_less(Mask a, Mask b) {
  const Mask diff = a ^ b;
  if (diff == 0) return false;
  const Mask low = diff & (~diff + 1);
  return (a & low) == 0;
}

// max over bids r of sum_s w_s * (r >= y_s ? win_s - y_s : lose_s). The
// expectation is piecewise constant in r, so the support prices and one bid
// below all of them are the only candidates.
double best_over_bids(const std::vector<Branch>& branches) {
  std::vector<double> candidates;
  double lowest = kUnavailable;
  for (const Branch& b : branches) {
    candidates.push_back(b.price);
    lowest = std::min(lowest, b.price);
  }
  candidates.push_back(lowest - 1.0);
  double best = -kUnavailable;
  for (double r : candidates) {
    double total = 0.0;
    for (const Branch& b : branches) total += b.weight * (r >= b.price ? b.win - b.price : b.lose);
    best = std::max(best, total);
  }
  return best;
}

// Calls fn(weight, prices) for every support combination of items i..n-1.
// Entries before i are kUnavailable.
template <typename Fn>
void for_each_combination(const Problem& p, int i, std::size_t cap, Fn&& fn) {
  std::size_t count = 1;
  for (int j = i; j < p.n; ++j) {
    count *= p.prices[j].points.size();
    if (count > cap) throw InstanceTooLarge("too many price combinations for exhaustive evaluation");
  }
  std::vector<double> y(p.n, kUnavailable);
  std::vector<std::size_t> idx(p.n, 0);
  for (std::size_t c = 0; c < count; ++c) {
    double w = 1.0;
    for (int j = i; j < p.n; ++j) {
      const auto& [price, prob] = p.prices[j].points[idx[j]];
      y[j] = price;
      w *= prob;
    }
    fn(w, y);
    for (int j = p.n - 1; j >= i; --j) {
      if (++idx[j] < p.prices[j].points.size()) break;
      idx[j] = 0;
    }
  }
}

std::vector<double> sample_prices(const Problem& p, int i, std::mt19937_64& rng) {
  std::vector<double> y(p.n, kUnavailable);
  for (int j = i; j < p.n; ++j) y[j] = p.prices[j].sample(rng);
  return y;
}

Branch make_branch(const Problem& p, int i, Mask h, double w, const std::vector<double>& y) {
  const Mask won = h | (Mask{1} << i);
  return Branch{w, y[i], opt_purchases(p, won, i + 1, y).objective, opt_purchases(p, h, i + 1, y).objective};
}

void check_state(const Problem& p, int i, Mask h) {
  p.validate();
  if (i < 0 || i > p.n) throw std::invalid_argument("item index out of range");
  if (h >> p.n) throw std::invalid_argument("holdings outside the item range");
}

}  // namespace

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (const auto& [v, pr] : points) m += v * pr;
  return m;
}

double DiscreteDistribution::min() const {
  double m = kUnavailable;
  for (const auto& [v, pr] : points) m = std::min(m, v);
  return m;
}

double DiscreteDistribution::sample(std::mt19937_64& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (const auto& [v, pr] : points) {
    acc += pr;
    if (u < acc) return v;
  }
  return points.back().first;
}

void Problem::validate() const {
  if (n < 1 || n > kMaxItems) throw std::invalid_argument("item count out of range");
  if (static_cast<int>(prices.size()) != n) throw std::invalid_argument("one price distribution per item");
  if (utility.size() != (std::size_t{1} << n)) throw std::invalid_argument("utility table must have 2^n entries");
  for (const auto& d : prices) {
    if (d.points.empty()) throw std::invalid_argument("empty price distribution");
    double total = 0.0;
    for (const auto& [v, pr] : d.points) {
      if (!(pr > 0.0)) throw std::invalid_argument("probabilities must be positive");
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("prices must be finite and nonnegative");
      total += pr;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
  }
}

PurchasePlan opt_purchases(const Problem& p, Mask h, int i, const std::vector<double>& y) {
  if (static_cast<int>(y.size()) != p.n) throw std::invalid_argument("price vector length");
  Mask open = 0;
  for (int j = std::max(i, 0); j < p.n; ++j) {
    if (!(h >> j & 1) && std::isfinite(y[j])) open |= Mask{1} << j;
  }
  PurchasePlan best{0, p.v(h)};
  // Enumerate all subsets of `open`.
  for (Mask g = open; g != 0; g = (g - 1) & open) {
    double cost = 0.0;
    for (int j = 0; j < p.n; ++j) {
      if (g >> j & 1) cost += y[j];
    }
    const double obj = p.v(h | g) - cost;
    if (obj > best.objective || (obj == best.objective && lex_less(g, best.g))) best = {g, obj};
  }
  return best;
}

double exact_value(const Problem& p, int i, Mask h, std::size_t state_cap) {
  check_state(p, i, h);
  std::unordered_map<std::uint64_t, double> memo;
  auto rec = [&](auto&& self, int item, Mask held) -> double {
    if (item == p.n) return p.v(held);
    const std::uint64_t key = (static_cast<std::uint64_t>(item) << 32) | held;
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (memo.size() >= state_cap) throw InstanceTooLarge("exact value state space exceeds cap");
    const double win = self(self, item + 1, held | (Mask{1} << item));
    const double lose = self(self, item + 1, held);
    std::vector<Branch> branches;
    for (const auto& [price, prob] : p.prices[item].points) branches.push_back({prob, price, win, lose});
    const double val = best_over_bids(branches);
    memo.emplace(key, val);
    return val;
  };
  return rec(rec, i, h);
}

double value_est(const Problem& p, int i, Mask h, std::size_t sample_cap) {
  check_state(p, i, h);
  if (i == p.n) return p.v(h);
  std::vector<Branch> branches;
  for_each_combination(p, i, sample_cap, [&](double w, const std::vector<double>& y) {
    branches.push_back(make_branch(p, i, h, w, y));
  });
  return best_over_bids(branches);
}

double value_est_sampled(const Problem& p, int i, Mask h, int samples, std::mt19937_64& rng) {
  check_state(p, i, h);
  if (samples < 1) throw std::invalid_argument("sample count must be positive");
  if (i == p.n) return p.v(h);
  std::vector<Branch> branches;
  for (int s = 0; s < samples; ++s) {
    branches.push_back(make_branch(p, i, h, 1.0 / samples, sample_prices(p, i, rng)));
  }
  return best_over_bids(branches);
}

double value_est_ev(const Problem& p, int i, Mask h) {
  check_state(p, i, h);
  if (i == p.n) return p.v(h);
  std::vector<double> y(p.n, kUnavailable);
  for (int j = i + 1; j < p.n; ++j) y[j] = p.prices[j].mean();
  const double win = opt_purchases(p, h | (Mask{1} << i), i + 1, y).objective;
  const double lose = opt_purchases(p, h, i + 1, y).objective;
  std::vector<Branch> branches;
  for (const auto& [price, prob] : p.prices[i].points) branches.push_back({prob, price, win, lose});
  return best_over_bids(branches);
}

MarginalBid marginal_bid(const Problem& p, int i, Mask h, int samples, std::mt19937_64& rng) {
  check_state(p, i, h);
  if (i >= p.n) throw std::invalid_argument("item already closed");
  if (samples < 1) throw std::invalid_argument("sample count must be positive");
  MarginalBid out;
  for (int s = 0; s < samples; ++s) {
    const Branch b = make_branch(p, i, h, 1.0 / samples, sample_prices(p, i, rng));
    out.values.push_back(b.win - b.lose);
    out.weights.push_back(b.weight);
    out.bid += b.weight * (b.win - b.lose);
  }
  return out;
}

MarginalBid marginal_bid_exhaustive(const Problem& p, int i, Mask h, std::size_t sample_cap) {
  check_state(p, i, h);
  if (i >= p.n) throw std::invalid_argument("item already closed");
  MarginalBid out;
  // y_i does not enter the branch values, so only later items are enumerated.
  for_each_combination(p, i + 1, sample_cap, [&](double w, const std::vector<double>& y) {
    const Branch b = make_branch(p, i, h, w, y);
    out.values.push_back(b.win - b.lose);
    out.weights.push_back(w);
    out.bid += w * (b.win - b.lose);
  });
  return out;
}

}  // namespace tac::seq
