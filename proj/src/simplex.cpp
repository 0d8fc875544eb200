#include "tac/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tac::lp {
namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr long long kRefactorEvery = 400;
constexpr int kBlandAfterDegenerate = 40;

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kUnbounded:
      return "unbounded";
    case Status::kIterationLimit:
      return "iteration-limit";
  }
  return "?";
}

BoundedSimplex::BoundedSimplex(int rows, std::vector<Column> columns, std::vector<double> rhs)
    : m_(rows), n_(static_cast<int>(columns.size())), cols_(std::move(columns)), b_(std::move(rhs)) {
  if (static_cast<int>(b_.size()) != m_) throw std::invalid_argument("rhs size mismatch");
  total_ = n_ + m_;
  cost_.assign(total_, 0.0);
  lb_.assign(total_, 0.0);
  ub_.assign(total_, kInfinity);
  for (int j = 0; j < n_; ++j) {
    const Column& c = cols_[j];
    cost_[j] = c.cost;
    lb_[j] = c.lower;
    ub_[j] = c.upper;
    if (!(c.lower <= c.upper) || !std::isfinite(c.lower)) {
      throw std::invalid_argument("column bounds must satisfy finite lower <= upper");
    }
    for (const auto& [r, v] : c.entries) {
      if (r < 0 || r >= m_) throw std::invalid_argument("row index out of range");
      (void)v;
    }
  }
  reset_to_slack_basis();
}

void BoundedSimplex::reset_to_slack_basis() {
  tableau_.assign(static_cast<std::size_t>(m_) * total_, 0.0);
  for (int j = 0; j < n_; ++j) {
    for (const auto& [r, v] : cols_[j].entries) row(r)[j] += v;
  }
  basis_.resize(m_);
  pos_.assign(total_, -1);
  at_upper_.assign(total_, 0);
  beta_.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    row(i)[n_ + i] = 1.0;
    basis_[i] = n_ + i;
    pos_[n_ + i] = i;
    beta_[i] = b_[i];
  }
  for (int j = 0; j < n_; ++j) {
    if (lb_[j] != 0.0) {
      for (const auto& [r, v] : cols_[j].entries) beta_[r] -= v * lb_[j];
    }
  }
  d_.assign(total_, 0.0);
  pivots_since_refactor_ = 0;
  duals_stale_ = true;
}

// Rebuilds B^-1 [A I] and the basic values from the original data for the
// current basis. Returns false (and falls back to the slack basis) when the
// basis matrix is numerically singular.
bool BoundedSimplex::refactor() {
  std::vector<double> full(static_cast<std::size_t>(m_) * total_, 0.0);
  std::vector<double> rhs = b_;
  auto at = [&](int i, int j) -> double& { return full[static_cast<std::size_t>(i) * total_ + j]; };
  for (int j = 0; j < n_; ++j) {
    for (const auto& [r, v] : cols_[j].entries) at(r, j) += v;
  }
  for (int i = 0; i < m_; ++i) at(i, n_ + i) = 1.0;
  for (int j = 0; j < total_; ++j) {
    if (pos_[j] >= 0) continue;
    const double x = nonbasic_value(j);
    if (x == 0.0) continue;
    for (int i = 0; i < m_; ++i) rhs[i] -= at(i, j) * x;
  }
  std::vector<int> basic_cols = basis_;
  std::vector<char> used(m_, 0);
  std::vector<int> new_basis(m_, -1);
  for (int c : basic_cols) {
    int p = -1;
    double best = 1e-11;
    for (int i = 0; i < m_; ++i) {
      if (used[i]) continue;
      if (std::abs(at(i, c)) > best) {
        best = std::abs(at(i, c));
        p = i;
      }
    }
    if (p < 0) {
      reset_to_slack_basis();
      return false;
    }
    used[p] = 1;
    new_basis[p] = c;
    const double inv = 1.0 / at(p, c);
    double* prow = &at(p, 0);
    for (int j = 0; j < total_; ++j) prow[j] *= inv;
    rhs[p] *= inv;
    for (int i = 0; i < m_; ++i) {
      if (i == p) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      double* irow = &at(i, 0);
      for (int j = 0; j < total_; ++j) irow[j] -= f * prow[j];
      rhs[i] -= f * rhs[p];
    }
  }
  tableau_ = std::move(full);
  basis_ = std::move(new_basis);
  std::fill(pos_.begin(), pos_.end(), -1);
  for (int i = 0; i < m_; ++i) pos_[basis_[i]] = i;
  beta_ = std::move(rhs);
  pivots_since_refactor_ = 0;
  duals_stale_ = true;
  return true;
}

void BoundedSimplex::recompute_duals() {
  for (int j = 0; j < total_; ++j) d_[j] = cost_[j];
  for (int i = 0; i < m_; ++i) {
    const double cb = cost_[basis_[i]];
    if (cb == 0.0) continue;
    const double* r = row(i);
    for (int j = 0; j < total_; ++j) d_[j] -= cb * r[j];
  }
  for (int i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
  duals_stale_ = false;
}

bool BoundedSimplex::primal_feasible() const {
  for (int i = 0; i < m_; ++i) {
    const int q = basis_[i];
    if (beta_[i] < lb_[q] - kPrimalTol || beta_[i] > ub_[q] + kPrimalTol) return false;
  }
  return true;
}

// Flips boxed nonbasic variables to the bound their reduced cost prefers and
// zeroes the reduced cost of the rest (a temporary cost shift). Duals are
// recomputed from the true costs once primal feasibility is restored.
void BoundedSimplex::make_dual_feasible() {
  for (int j = 0; j < total_; ++j) {
    if (pos_[j] >= 0 || lb_[j] == ub_[j]) continue;
    if (!at_upper_[j] && d_[j] > kDualTol) {
      if (std::isfinite(ub_[j])) {
        const double delta = ub_[j] - lb_[j];
        for (int i = 0; i < m_; ++i) beta_[i] -= delta * row(i)[j];
        at_upper_[j] = 1;
      } else {
        d_[j] = 0.0;
        duals_stale_ = true;
      }
    } else if (at_upper_[j] && d_[j] < -kDualTol) {
      const double delta = lb_[j] - ub_[j];
      for (int i = 0; i < m_; ++i) beta_[i] -= delta * row(i)[j];
      at_upper_[j] = 0;
    }
  }
}

void BoundedSimplex::pivot(int r, int j, double delta, bool leaving_to_upper) {
  const int q = basis_[r];
  const double new_xj = nonbasic_value(j) + delta;
  if (delta != 0.0) {
    for (int i = 0; i < m_; ++i) beta_[i] -= delta * row(i)[j];
  }

  double* prow = row(r);
  const double inv = 1.0 / prow[j];
  scratch_.clear();
  for (int k = 0; k < total_; ++k) {
    if (prow[k] != 0.0) {
      prow[k] *= inv;
      scratch_.push_back(k);
    }
  }
  prow[j] = 1.0;
  const double dj = d_[j];
  if (dj != 0.0) {
    for (int k : scratch_) d_[k] -= dj * prow[k];
  }
  const bool sparse = static_cast<int>(scratch_.size()) * 3 < total_;
  for (int i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* irow = row(i);
    const double f = irow[j];
    if (f == 0.0) continue;
    if (sparse) {
      for (int k : scratch_) irow[k] -= f * prow[k];
    } else {
      for (int k = 0; k < total_; ++k) irow[k] -= f * prow[k];
    }
    irow[j] = 0.0;
  }
  d_[j] = 0.0;

  basis_[r] = j;
  pos_[j] = r;
  pos_[q] = -1;
  at_upper_[q] = leaving_to_upper ? 1 : 0;
  at_upper_[j] = 0;
  beta_[r] = new_xj;
  ++pivots_;
  ++pivots_since_refactor_;
}

Status BoundedSimplex::dual_simplex() {
  const long long limit = 50LL * (m_ + total_);
  for (long long it = 0; it < limit; ++it) {
    int r = -1;
    double worst = kPrimalTol;
    bool to_lower = true;
    for (int i = 0; i < m_; ++i) {
      const int q = basis_[i];
      const double below = lb_[q] - beta_[i];
      const double above = beta_[i] - ub_[q];
      if (below > worst) {
        worst = below;
        r = i;
        to_lower = true;
      } else if (above > worst) {
        worst = above;
        r = i;
        to_lower = false;
      }
    }
    if (r < 0) return Status::kOptimal;

    const double* prow = row(r);
    int enter = -1;
    double best_ratio = kInfinity;
    double best_alpha = 0.0;
    for (int j = 0; j < total_; ++j) {
      if (pos_[j] >= 0 || lb_[j] == ub_[j]) continue;
      const double alpha = prow[j];
      if (std::abs(alpha) <= kPivotTol) continue;
      const bool lower = !at_upper_[j];
      // Moving x_j away from its bound must push the leaving variable
      // toward the violated bound.
      const bool eligible = to_lower ? (lower ? alpha < 0 : alpha > 0) : (lower ? alpha > 0 : alpha < 0);
      if (!eligible) continue;
      const double ratio = std::abs(d_[j]) / std::abs(alpha);
      if (ratio < best_ratio - 1e-12 ||
          (ratio <= best_ratio + 1e-12 && std::abs(alpha) > std::abs(best_alpha))) {
        best_ratio = ratio;
        best_alpha = alpha;
        enter = j;
      }
    }
    if (enter < 0) return Status::kInfeasible;
    const int q = basis_[r];
    const double target = to_lower ? lb_[q] : ub_[q];
    const double delta = (beta_[r] - target) / prow[enter];
    pivot(r, enter, delta, !to_lower);
  }
  return Status::kIterationLimit;
}

Status BoundedSimplex::primal_simplex() {
  const long long limit = 50LL * (m_ + total_);
  int degenerate = 0;
  for (long long it = 0; it < limit; ++it) {
    const bool bland = degenerate > kBlandAfterDegenerate;
    int enter = -1;
    double best = 0.0;
    for (int j = 0; j < total_; ++j) {
      if (pos_[j] >= 0 || lb_[j] == ub_[j]) continue;
      const double dj = d_[j];
      const double gain = at_upper_[j] ? -dj : dj;
      if (gain <= kDualTol) continue;
      if (bland) {
        enter = j;
        break;
      }
      if (gain > best) {
        best = gain;
        enter = j;
      }
    }
    if (enter < 0) return Status::kOptimal;

    const double dir = at_upper_[enter] ? -1.0 : 1.0;
    double step = ub_[enter] - lb_[enter];
    int leave = -1;
    bool leave_to_upper = false;
    double leave_alpha = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double a = dir * row(i)[enter];
      if (std::abs(a) <= kPivotTol) continue;
      const int q = basis_[i];
      double limit_i;
      bool to_upper;
      if (a > 0) {
        limit_i = (beta_[i] - lb_[q]) / a;
        to_upper = false;
      } else {
        if (!std::isfinite(ub_[q])) continue;
        limit_i = (ub_[q] - beta_[i]) / (-a);
        to_upper = true;
      }
      limit_i = std::max(0.0, limit_i);
      bool take = false;
      if (limit_i < step - 1e-12) {
        take = true;
      } else if (limit_i <= step + 1e-12 && leave >= 0) {
        take = bland ? basis_[i] < basis_[leave] : std::abs(a) > std::abs(leave_alpha);
      }
      if (take) {
        step = limit_i;
        leave = i;
        leave_to_upper = to_upper;
        leave_alpha = a;
      }
    }
    if (!std::isfinite(step)) return Status::kUnbounded;
    degenerate = step <= 1e-12 ? degenerate + 1 : 0;
    if (leave < 0) {
      // Bound flip of the entering variable.
      const double delta = dir * step;
      for (int i = 0; i < m_; ++i) beta_[i] -= delta * row(i)[enter];
      at_upper_[enter] = at_upper_[enter] ? 0 : 1;
      continue;
    }
    pivot(leave, enter, dir * step, leave_to_upper);
  }
  return Status::kIterationLimit;
}

bool BoundedSimplex::verify() const {
  std::vector<double> x(total_);
  for (int j = 0; j < total_; ++j) x[j] = pos_[j] >= 0 ? beta_[pos_[j]] : nonbasic_value(j);
  std::vector<double> lhs(m_, 0.0);
  for (int j = 0; j < n_; ++j) {
    if (x[j] == 0.0) continue;
    for (const auto& [r, v] : cols_[j].entries) lhs[r] += v * x[j];
  }
  for (int i = 0; i < m_; ++i) {
    const double scale = 1.0 + std::abs(b_[i]);
    if (std::abs(lhs[i] + x[n_ + i] - b_[i]) > 1e-7 * scale) return false;
  }
  for (int j = 0; j < total_; ++j) {
    if (x[j] < lb_[j] - 1e-7 || x[j] > ub_[j] + 1e-7) return false;
  }
  return true;
}

Status BoundedSimplex::solve() {
  if (pivots_since_refactor_ > kRefactorEvery) refactor();
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (duals_stale_) recompute_duals();
    if (!primal_feasible()) {
      make_dual_feasible();
      const Status s = dual_simplex();
      if (s == Status::kInfeasible) return s;
      if (s != Status::kOptimal) {
        reset_to_slack_basis();
        continue;
      }
      if (duals_stale_) recompute_duals();
    }
    const Status s = primal_simplex();
    if (s == Status::kUnbounded) return s;
    if (s == Status::kOptimal && verify()) return s;
    if (!refactor() || attempt == 1) reset_to_slack_basis();
  }
  return Status::kIterationLimit;
}

void BoundedSimplex::set_rhs(int row_index, double value) {
  const double delta = value - b_[row_index];
  if (delta == 0.0) return;
  b_[row_index] = value;
  const int slack = n_ + row_index;
  for (int i = 0; i < m_; ++i) beta_[i] += delta * row(i)[slack];
}

void BoundedSimplex::set_cost(int col, double value) {
  const double delta = value - cost_[col];
  if (delta == 0.0) return;
  cost_[col] = value;
  if (pos_[col] < 0) {
    d_[col] += delta;
  } else {
    duals_stale_ = true;
  }
}

void BoundedSimplex::set_bounds(int col, double lower, double upper) {
  if (!(lower <= upper) || !std::isfinite(lower)) throw std::invalid_argument("bad bounds");
  if (pos_[col] >= 0) {
    lb_[col] = lower;
    ub_[col] = upper;
    return;
  }
  const double old_x = nonbasic_value(col);
  lb_[col] = lower;
  ub_[col] = upper;
  if (at_upper_[col] && !std::isfinite(upper)) at_upper_[col] = 0;
  const double delta = nonbasic_value(col) - old_x;
  if (delta != 0.0) {
    for (int i = 0; i < m_; ++i) beta_[i] -= delta * row(i)[col];
  }
}

double BoundedSimplex::value(int col) const {
  return pos_[col] >= 0 ? beta_[pos_[col]] : nonbasic_value(col);
}

std::vector<double> BoundedSimplex::values() const {
  std::vector<double> x(n_);
  for (int j = 0; j < n_; ++j) x[j] = value(j);
  return x;
}

double BoundedSimplex::objective() const {
  double z = 0.0;
  for (int j = 0; j < n_; ++j) z += cost_[j] * value(j);
  return z;
}

}  // namespace tac::lp
