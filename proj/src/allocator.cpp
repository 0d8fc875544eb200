#include "tac/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace tac {
namespace {

constexpr int kPackages = 20;
constexpr double kIntTol = 1e-6;
constexpr double kPruneTol = 1e-9;

bool is_integral(double v) { return std::abs(v - std::round(v)) <= kIntTol; }

}  // namespace

PriceSchedule unavailable_prices() { return PriceSchedule{}; }

double quantity_cost(double p, int q, double c) {
  if (q < 0) throw std::invalid_argument("negative quantity");
  if (c < 1.0) throw std::invalid_argument("impact constant below 1");
  return q * p * std::pow(c, std::max(0, q - 2));
}

double purchase_cost(int good, const GoodPrice& price, int q) {
  if (is_hotel(good)) return quantity_cost(price.price, q, price.impact);
  return q * price.price;
}

AllocationLp::AllocationLp(std::vector<ClientPreferences> clients) : clients_(std::move(clients)) {
  if (clients_.size() > static_cast<std::size_t>(kClientsPerAgent)) {
    throw std::invalid_argument("at most 8 clients");
  }
  rebuild();
}

int AllocationLp::x_col(int client, int package) const { return client * kPackages + package; }

int AllocationLp::t_col(int client, int type, int day) const {
  return num_x_ + (client * kNumEntertainmentTypes + type) * 4 + (day - 1);
}

void AllocationLp::rebuild() {
  const int nc = static_cast<int>(clients_.size());
  num_x_ = nc * kPackages;
  num_t_ = nc * kNumEntertainmentTypes * 4;
  hotel_units_ = std::max(1, nc);
  const int client_row = 0;
  const int day_row = nc;
  const int type_row = day_row + 4 * nc;
  goods_row_ = type_row + kNumEntertainmentTypes * nc;
  const int rows = goods_row_ + kNumGoods;

  columns_.clear();
  const auto& pkgs = base_packages();
  for (int c = 0; c < nc; ++c) {
    for (int p = 0; p < kPackages; ++p) {
      const TravelPackage& pkg = pkgs[p];
      lp::Column col;
      col.cost = client_utility(clients_[c], pkg);
      col.upper = 1.0;
      col.entries.push_back({client_row + c, 1.0});
      for (int d = pkg.arrival; d < pkg.departure; ++d) col.entries.push_back({day_row + 4 * c + d - 1, -1.0});
      for (int e = 0; e < kNumEntertainmentTypes; ++e) {
        col.entries.push_back({type_row + kNumEntertainmentTypes * c + e, -1.0});
      }
      const GoodVector u = pkg.usage();
      for (int g = 0; g < kNumGoods; ++g) {
        if (u[g] != 0) col.entries.push_back({goods_row_ + g, static_cast<double>(u[g])});
      }
      columns_.push_back(std::move(col));
    }
  }
  for (int c = 0; c < nc; ++c) {
    for (int e = 0; e < kNumEntertainmentTypes; ++e) {
      for (int d = 1; d <= 4; ++d) {
        lp::Column col;
        col.cost = clients_[c].fun[e];
        col.upper = 1.0;
        col.entries.push_back({day_row + 4 * c + d - 1, 1.0});
        col.entries.push_back({type_row + kNumEntertainmentTypes * c + e, 1.0});
        col.entries.push_back({goods_row_ + fun_good(e, d), 1.0});
        columns_.push_back(std::move(col));
      }
    }
  }
  for (int g = 0; g < kNumGoods; ++g) {
    purchase_col_[g] = static_cast<int>(columns_.size());
    const int count = is_hotel(g) ? hotel_units_ : 1;
    for (int k = 0; k < count; ++k) {
      lp::Column col;
      col.upper = 0.0;
      col.entries.push_back({goods_row_ + g, -1.0});
      columns_.push_back(std::move(col));
    }
  }
  penalty_.assign(columns_.size(), 0.0);
  for (int g = 0; g < kNumGoods; ++g) {
    const int count = is_hotel(g) ? hotel_units_ : 1;
    for (int k = 0; k < count; ++k) penalty_[purchase_col_[g] + k] = tie_penalty(g);
  }

  std::vector<double> rhs(rows, 0.0);
  for (int c = 0; c < nc; ++c) rhs[client_row + c] = 1.0;
  for (int g = 0; g < kNumGoods; ++g) rhs[goods_row_ + g] = holdings_[g];
  lp_.emplace(rows, columns_, rhs);
  penalties_on_ = false;
  for (int g = 0; g < kNumGoods; ++g) apply_price(g);
}

// Small per-unit charge so that among equal-valued plans the one with fewer
// purchases wins, then the one buying later-indexed goods.
double AllocationLp::tie_penalty(int good) const { return 1e-6 * (1.0 + (kNumGoods - 1 - good) * 1e-3); }

void AllocationLp::apply_price(int g) {
  const int nc = static_cast<int>(clients_.size());
  const auto& y = prices_[g];
  const int first = purchase_col_[g];
  const double pen = penalties_on_ ? 1.0 : 0.0;
  if (is_hotel(g)) {
    for (int k = 0; k < hotel_units_; ++k) {
      const int col = first + k;
      const int q = k + 1;
      if (y && q <= y->max_units) {
        const double m = quantity_cost(y->price, q, y->impact) - quantity_cost(y->price, q - 1, y->impact);
        lp_->set_cost(col, -m - pen * penalty_[col]);
        lp_->set_bounds(col, 0.0, 1.0);
      } else {
        lp_->set_cost(col, 0.0);
        lp_->set_bounds(col, 0.0, 0.0);
      }
    }
    return;
  }
  if (y) {
    lp_->set_cost(first, -y->price - pen * penalty_[first]);
    lp_->set_bounds(first, 0.0, std::min(y->max_units, std::max(1, nc)));
  } else {
    lp_->set_cost(first, 0.0);
    lp_->set_bounds(first, 0.0, 0.0);
  }
}

void AllocationLp::set_penalties(bool on) {
  if (penalties_on_ == on) return;
  penalties_on_ = on;
  for (int g = 0; g < kNumGoods; ++g) apply_price(g);
}

void AllocationLp::set_holdings(const GoodVector& h) {
  for (int g = 0; g < kNumGoods; ++g) {
    if (h[g] < 0) throw std::invalid_argument("negative holdings");
    if (h[g] != holdings_[g]) lp_->set_rhs(goods_row_ + g, h[g]);
  }
  holdings_ = h;
}

void AllocationLp::set_prices(const PriceSchedule& y) {
  for (int g = 0; g < kNumGoods; ++g) {
    if (y[g] && (y[g]->price < 0.0 || y[g]->impact < 1.0 || y[g]->max_units < 0)) {
      throw std::invalid_argument("invalid price for " + good_name(g));
    }
  }
  prices_ = y;
  for (int g = 0; g < kNumGoods; ++g) apply_price(g);
}

double AllocationLp::relaxation_value() {
  set_penalties(false);
  lp::Status s = lp_->solve();
  if (s != lp::Status::kOptimal) {
    rebuild();
    s = lp_->solve();
    if (s != lp::Status::kOptimal) throw std::runtime_error(std::string("allocation LP: ") + lp::to_string(s));
  }
  return lp_->objective();
}

AllocationResult AllocationLp::extract(const std::vector<double>& x) const {
  const int nc = static_cast<int>(clients_.size());
  const auto& pkgs = base_packages();
  AllocationResult r;
  r.packages.assign(nc, std::nullopt);
  GoodVector used{};
  for (int c = 0; c < nc; ++c) {
    for (int p = 0; p < kPackages; ++p) {
      if (x[x_col(c, p)] > 0.5) r.packages[c] = pkgs[p];
    }
    if (!r.packages[c]) continue;
    for (int e = 0; e < kNumEntertainmentTypes; ++e) {
      for (int d = 1; d <= 4; ++d) {
        if (x[t_col(c, e, d)] > 0.5) r.packages[c]->ticket_day[e] = d;
      }
    }
    const GoodVector u = r.packages[c]->usage();
    for (int g = 0; g < kNumGoods; ++g) used[g] += u[g];
    r.utility += client_utility(clients_[c], r.packages[c]);
  }
  for (int g = 0; g < kNumGoods; ++g) {
    const int q = std::max(0, used[g] - holdings_[g]);
    r.purchases[g] = q;
    if (q > 0) {
      if (!prices_[g] || q > prices_[g]->max_units) throw std::logic_error("allocation buys an unavailable good");
      r.cost += purchase_cost(g, *prices_[g], q);
    }
  }
  r.objective = r.utility - r.cost;
  return r;
}

AllocationResult AllocationLp::solve_exact(const OptOptions& options) {
  struct BoundChange {
    int col;
    double lower;
    double upper;
  };
  struct Node {
    double bound;
    long id;
    std::vector<BoundChange> changes;
  };
  struct Worse {
    bool operator()(const Node& a, const Node& b) const {
      if (a.bound != b.bound) return a.bound < b.bound;
      return a.id > b.id;
    }
  };

  const int ncols = static_cast<int>(columns_.size());
  std::vector<double> root_lower(ncols), root_upper(ncols);
  set_penalties(true);
  for (int j = 0; j < ncols; ++j) {
    root_lower[j] = lp_->lower(j);
    root_upper[j] = lp_->upper(j);
  }

  std::priority_queue<Node, std::vector<Node>, Worse> open;
  open.push(Node{lp::kInfinity, 0, {}});
  long next_id = 1;
  long nodes = 0;
  std::optional<std::vector<double>> incumbent;
  double incumbent_value = -lp::kInfinity;
  std::vector<BoundChange> applied;

  auto restore = [&] {
    for (const BoundChange& bc : applied) lp_->set_bounds(bc.col, root_lower[bc.col], root_upper[bc.col]);
    applied.clear();
  };

  double open_bound = -lp::kInfinity;
  while (!open.empty()) {
    if (nodes >= options.node_limit) {
      open_bound = open.top().bound;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound <= incumbent_value + kPruneTol) continue;
    ++nodes;
    restore();
    for (const BoundChange& bc : node.changes) {
      lp_->set_bounds(bc.col, bc.lower, bc.upper);
      applied.push_back(bc);
    }
    lp::Status s = lp_->solve();
    if (s == lp::Status::kIterationLimit) {
      // Numerical trouble: retry once from a fresh factorization.
      std::vector<std::pair<int, std::pair<double, double>>> saved;
      for (int j = 0; j < ncols; ++j) saved.push_back({j, {lp_->lower(j), lp_->upper(j)}});
      const GoodVector h = holdings_;
      rebuild();
      set_holdings(h);
      set_penalties(true);
      for (const auto& [j, b] : saved) lp_->set_bounds(j, b.first, b.second);
      s = lp_->solve();
    }
    if (s != lp::Status::kOptimal) continue;
    const double bound = lp_->objective();
    if (bound <= incumbent_value + kPruneTol) continue;

    const std::vector<double> x = lp_->values();
    int branch = -1;
    double best_frac = 0.0;
    for (int j = 0; j < ncols; ++j) {
      const double f = x[j] - std::floor(x[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist > kIntTol && dist > best_frac + 1e-12) {
        best_frac = dist;
        branch = j;
      }
    }
    if (branch < 0) {
      incumbent = x;
      incumbent_value = bound;
      continue;
    }
    const double fl = std::floor(x[branch]);
    Node down{bound, next_id++, node.changes};
    down.changes.push_back({branch, lp_->lower(branch), fl});
    Node up{bound, next_id++, std::move(node.changes)};
    up.changes.push_back({branch, fl + 1.0, lp_->upper(branch)});
    open.push(std::move(up));
    open.push(std::move(down));
  }
  restore();
  set_penalties(false);

  AllocationResult result;
  if (incumbent) {
    std::vector<double> xi = *incumbent;
    for (double& v : xi) {
      if (is_integral(v)) v = std::round(v);
    }
    result = extract(xi);
  } else {
    result = extract(std::vector<double>(ncols, 0.0));
  }
  result.nodes = nodes;
  if (open_bound > -lp::kInfinity && open_bound > incumbent_value + kPruneTol) {
    result.exact = false;
    result.bound_gap = open_bound - result.objective;
  }
  return result;
}

AllocationResult opt(const GoodVector& holdings, const PriceSchedule& prices,
                     const std::vector<ClientPreferences>& clients, const OptOptions& options) {
  AllocationLp lp(clients);
  lp.set_holdings(holdings);
  lp.set_prices(prices);
  return lp.solve_exact(options);
}

double v(const GoodVector& goods, const std::vector<ClientPreferences>& clients) {
  return opt(goods, unavailable_prices(), clients).objective;
}

double lp_relaxation_value(const GoodVector& holdings, const PriceSchedule& prices,
                           const std::vector<ClientPreferences>& clients) {
  AllocationLp lp(clients);
  lp.set_holdings(holdings);
  lp.set_prices(prices);
  return lp.relaxation_value();
}

double estimate_c(const std::vector<std::vector<double>>& auctions) {
  double sum = 0.0;
  int count = 0;
  for (const auto& bids : auctions) {
    if (bids.size() < 18) continue;
    std::vector<double> b = bids;
    for (double& x : b) x = std::max(1.0, x);
    std::sort(b.begin(), b.end(), std::greater<>());
    sum += std::log(b[13] / b[17]);
    ++count;
  }
  if (count == 0) return 1.0;
  return std::exp(sum / count / 4.0);
}

double evaluate_allocation(const std::vector<std::optional<TravelPackage>>& packages,
                           const std::vector<ClientPreferences>& clients, const GoodVector& holdings,
                           const PriceSchedule& prices, bool* feasible) {
  if (feasible) *feasible = true;
  if (packages.size() != clients.size()) throw std::invalid_argument("one package slot per client");
  GoodVector used{};
  double total = 0.0;
  for (std::size_t c = 0; c < clients.size(); ++c) {
    if (!packages[c]) continue;
    if (!packages[c]->feasible()) {
      if (feasible) *feasible = false;
      return -lp::kInfinity;
    }
    total += client_utility(clients[c], packages[c]);
    used = used + packages[c]->usage();
  }
  for (int g = 0; g < kNumGoods; ++g) {
    const int q = std::max(0, used[g] - holdings[g]);
    if (q == 0) continue;
    if (!prices[g] || q > prices[g]->max_units) {
      if (feasible) *feasible = false;
      return -lp::kInfinity;
    }
    total -= purchase_cost(g, *prices[g], q);
  }
  return total;
}

}  // namespace tac
