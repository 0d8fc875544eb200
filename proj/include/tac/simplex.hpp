#pragma once

// Dense-tableau bounded-variable simplex for
//
//   maximize c'x  subject to  A x <= b,  lower <= x <= upper.
//
// The solver keeps its basis between calls, so after a change to the
// right-hand side, the costs or the bounds, solve() continues from the
// previous optimum (dual simplex to regain primal feasibility, then primal
// simplex). Objects are plain values: copying one snapshots the whole solver
// state, which is what branch-and-bound relies on.

#include <limits>
#include <utility>
#include <vector>

namespace tac::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Column {
  std::vector<std::pair<int, double>> entries;  // (row, coefficient)
  double cost = 0.0;
  double lower = 0.0;
  double upper = kInfinity;
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(Status s);

class BoundedSimplex {
 public:
  BoundedSimplex(int rows, std::vector<Column> columns, std::vector<double> rhs);

  Status solve();

  void set_rhs(int row, double value);
  void set_cost(int col, double value);
  void set_bounds(int col, double lower, double upper);

  int rows() const { return m_; }
  int columns() const { return n_; }
  double rhs(int row) const { return b_[row]; }
  double cost(int col) const { return cost_[col]; }
  double lower(int col) const { return lb_[col]; }
  double upper(int col) const { return ub_[col]; }

  // Valid after solve() returned kOptimal.
  double objective() const;
  double value(int col) const;
  std::vector<double> values() const;
  long long pivot_count() const { return pivots_; }

 private:
  double nonbasic_value(int j) const { return at_upper_[j] ? ub_[j] : lb_[j]; }
  double* row(int i) { return tableau_.data() + static_cast<std::size_t>(i) * total_; }
  const double* row(int i) const { return tableau_.data() + static_cast<std::size_t>(i) * total_; }

  void reset_to_slack_basis();
  bool refactor();
  void recompute_duals();
  bool primal_feasible() const;
  void make_dual_feasible();
  Status dual_simplex();
  Status primal_simplex();
  void pivot(int r, int j, double delta, bool leaving_to_upper);
  bool verify() const;

  int m_ = 0;      // rows
  int n_ = 0;      // structural columns
  int total_ = 0;  // structural + slack
  std::vector<Column> cols_;
  std::vector<double> b_;
  std::vector<double> cost_, lb_, ub_;
  std::vector<double> tableau_;  // m_ x total_, row-major: B^-1 [A I]
  std::vector<double> beta_;     // values of basic variables
  std::vector<double> d_;        // reduced costs
  std::vector<int> basis_;       // basis_[i] = variable basic in row i
  std::vector<int> pos_;         // pos_[j] = row of basic j, -1 if nonbasic
  std::vector<char> at_upper_;
  std::vector<int> scratch_;
  long long pivots_ = 0;
  long long pivots_since_refactor_ = 0;
  bool duals_stale_ = true;  // d_ must be rebuilt from cost_
};

}  // namespace tac::lp
