// Dense bounded-variable primal simplex (two phases).
//
// Structural variables are shifted so every lower bound is zero. Each
// inequality row receives a slack; rows whose slack cannot start basic get an
// artificial column. Nonbasic columns sit at either bound, so upper bounds
// never become explicit rows.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "restore/opt/model.hpp"

namespace restore::opt {
namespace {

class Tableau {
 public:
  Tableau(int rows, int cols)
      : m_(rows), n_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double* row(int i) { return a_.data() + static_cast<std::size_t>(i) * n_; }
  int rows() const { return m_; }
  int cols() const { return n_; }

 private:
  int m_;
  int n_;
  std::vector<double> a_;
};

struct SimplexState {
  Tableau tab;
  std::vector<double> beta;    // values of basic variables
  std::vector<int> basis;      // column basic in each row
  std::vector<char> is_basic;
  std::vector<char> at_upper;  // nonbasic at upper bound
  std::vector<double> upper;   // shifted upper bounds (lower = 0)
  std::vector<double> d;       // reduced costs
  std::vector<int> start;      // initial basis; its tableau columns hold B^-1
  std::vector<double> rhs;
  std::int64_t iterations = 0;
};

// Recomputes basic values from B^-1 to shed accumulated rounding.
void refresh_beta(SimplexState& s) {
  const Tableau& t = s.tab;
  for (int i = 0; i < t.rows(); ++i) {
    double b = 0.0;
    for (int k = 0; k < t.rows(); ++k) b += t.at(i, s.start[k]) * s.rhs[k];
    for (int j = 0; j < t.cols(); ++j)
      if (!s.is_basic[j] && s.at_upper[j]) b -= t.at(i, j) * s.upper[j];
    s.beta[i] = b;
  }
}

void pivot(SimplexState& s, int r, int e) {
  Tableau& t = s.tab;
  const int n = t.cols();
  double* pr = t.row(r);
  const double inv = 1.0 / pr[e];
  // Network rows stay sparse, so only the pivot row's nonzeros are swept.
  static thread_local std::vector<int> nz;
  nz.clear();
  for (int j = 0; j < n; ++j)
    if (pr[j] != 0.0) {
      pr[j] *= inv;
      nz.push_back(j);
    }
  pr[e] = 1.0;
  for (int i = 0; i < t.rows(); ++i) {
    if (i == r) continue;
    double* pi = t.row(i);
    const double f = pi[e];
    if (f == 0.0) continue;
    for (int j : nz) pi[j] -= f * pr[j];
    pi[e] = 0.0;
  }
  const double f = s.d[e];
  if (f != 0.0) {
    for (int j : nz) s.d[j] -= f * pr[j];
    s.d[e] = 0.0;
  }
}

void compute_reduced_costs(SimplexState& s, const std::vector<double>& cost) {
  const int n = s.tab.cols();
  s.d = cost;
  for (int i = 0; i < s.tab.rows(); ++i) {
    const double cb = cost[s.basis[i]];
    if (cb == 0.0) continue;
    const double* pi = s.tab.row(i);
    for (int j = 0; j < n; ++j) s.d[j] -= cb * pi[j];
  }
}

SolveStatus run_simplex(SimplexState& s, const std::vector<double>& cost,
                        const LpOptions& opt) {
  compute_reduced_costs(s, cost);
  const int m = s.tab.rows();
  const int n = s.tab.cols();
  int degenerate_run = 0;
  while (true) {
    if (s.iterations >= opt.iteration_limit) return SolveStatus::IterationLimit;
    const bool bland = degenerate_run > 40;
    int enter = -1;
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
      if (s.is_basic[j] || s.upper[j] <= 0.0) continue;
      const double dj = s.d[j];
      double score = 0.0;
      if (!s.at_upper[j] && dj < -opt.optimality_tol) score = -dj;
      else if (s.at_upper[j] && dj > opt.optimality_tol) score = dj;
      else continue;
      if (bland) { enter = j; break; }
      if (score > best) { best = score; enter = j; }
    }
    if (enter < 0) return SolveStatus::Optimal;
    if (++s.iterations % 256 == 0) refresh_beta(s);

    const double dir = s.at_upper[enter] ? -1.0 : 1.0;
    double theta = s.upper[enter];
    int leave = -1;
    bool leave_to_upper = false;
    double leave_pivot = 0.0;
    for (int i = 0; i < m; ++i) {
      const double a = s.tab.at(i, enter);
      if (std::abs(a) < opt.pivot_tol) continue;
      const double delta = -dir * a;
      const int bj = s.basis[i];
      double lim;
      if (delta < 0.0) {
        lim = std::max(s.beta[i], 0.0) / -delta;
      } else {
        if (!std::isfinite(s.upper[bj])) continue;
        lim = std::max(s.upper[bj] - s.beta[i], 0.0) / delta;
      }
      // Ties with the entering bound flip keep the flip; ties between rows
      // prefer the larger pivot (or the lowest index under Bland's rule).
      bool take = lim < theta - 1e-12;
      if (!take && leave >= 0 && lim <= theta + 1e-12) {
        take = bland ? bj < s.basis[leave] : std::abs(a) > std::abs(leave_pivot);
      }
      if (take) {
        theta = lim;
        leave = i;
        leave_to_upper = delta > 0.0;
        leave_pivot = a;
      }
    }
    if (!std::isfinite(theta)) return SolveStatus::Unbounded;
    degenerate_run = theta < 1e-11 ? degenerate_run + 1 : 0;

    for (int i = 0; i < m; ++i) {
      const double a = s.tab.at(i, enter);
      if (a != 0.0) s.beta[i] += -dir * a * theta;
    }
    if (leave < 0) {
      s.at_upper[enter] = !s.at_upper[enter];
      continue;
    }
    const double entering_value = s.at_upper[enter] ? s.upper[enter] - theta : theta;
    const int out = s.basis[leave];
    s.is_basic[out] = 0;
    s.at_upper[out] = leave_to_upper ? 1 : 0;
    s.beta[leave] = entering_value;
    pivot(s, leave, enter);
    s.basis[leave] = enter;
    s.is_basic[enter] = 1;
    s.at_upper[enter] = 0;
  }
}

}  // namespace

Solution solve_lp(const Model& model, const LpOptions& options) {
  std::vector<double> lo, up;
  lo.reserve(model.num_variables());
  up.reserve(model.num_variables());
  for (const auto& v : model.variables()) {
    lo.push_back(v.lower);
    up.push_back(v.upper);
  }
  return solve_lp(model, lo, up, options);
}

Solution solve_lp(const Model& model, std::span<const double> lower,
                  std::span<const double> upper, const LpOptions& opt) {
  const int n = model.num_variables();
  const int m = model.num_rows();
  Solution out;
  for (int j = 0; j < n; ++j) {
    if (upper[j] < lower[j] - opt.feasibility_tol) {
      out.status = SolveStatus::Infeasible;
      return out;
    }
  }

  // Shifted right-hand sides and row orientation.
  std::vector<double> rhs(m);
  std::vector<double> sign(m, 1.0);
  std::vector<int> slack_col(m, -1);
  std::vector<double> slack_coef(m, 0.0);
  int cols = n;
  for (int i = 0; i < m; ++i) {
    const Row& row = model.rows()[i];
    double b = row.rhs;
    for (const auto& t : row.terms) b -= t.coef * lower[t.var];
    if (row.sense != RowSense::Equal) {
      slack_col[i] = cols++;
      slack_coef[i] = row.sense == RowSense::LessEqual ? 1.0 : -1.0;
    }
    if (b < 0.0) {
      sign[i] = -1.0;
      b = -b;
    }
    rhs[i] = b;
  }
  std::vector<int> art_col(m, -1);
  const int first_art = cols;
  for (int i = 0; i < m; ++i) {
    const bool slack_basic = slack_col[i] >= 0 && sign[i] * slack_coef[i] > 0.0;
    if (!slack_basic) art_col[i] = cols++;
  }

  SimplexState s{Tableau(m, cols), rhs, std::vector<int>(m), std::vector<char>(cols, 0),
                 std::vector<char>(cols, 0), std::vector<double>(cols, kInfinity), {}, std::vector<int>(m), rhs};
  for (int j = 0; j < n; ++j) s.upper[j] = upper[j] - lower[j];
  for (int i = 0; i < m; ++i) {
    const Row& row = model.rows()[i];
    for (const auto& t : row.terms) s.tab.at(i, t.var) += sign[i] * t.coef;
    if (slack_col[i] >= 0) s.tab.at(i, slack_col[i]) = sign[i] * slack_coef[i];
    if (art_col[i] >= 0) {
      s.tab.at(i, art_col[i]) = 1.0;
      s.basis[i] = art_col[i];
    } else {
      s.basis[i] = slack_col[i];
    }
    s.is_basic[s.basis[i]] = 1;
    s.start[i] = s.basis[i];
  }

  if (cols > first_art) {
    std::vector<double> phase1(cols, 0.0);
    for (int j = first_art; j < cols; ++j) phase1[j] = 1.0;
    const SolveStatus st = run_simplex(s, phase1, opt);
    refresh_beta(s);
    if (st == SolveStatus::IterationLimit) {
      out.status = st;
      out.iterations = s.iterations;
      return out;
    }
    double infeas = 0.0;
    for (int i = 0; i < m; ++i)
      if (s.basis[i] >= first_art) infeas += s.beta[i];
    if (infeas > opt.feasibility_tol * std::max(1.0, static_cast<double>(m))) {
      out.status = SolveStatus::Infeasible;
      out.iterations = s.iterations;
      return out;
    }
    for (int j = first_art; j < cols; ++j) s.upper[j] = 0.0;
    // Drive zero-level artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (s.basis[i] < first_art) continue;
      int best = -1;
      double best_abs = 1e-7;
      for (int j = 0; j < first_art; ++j) {
        if (s.is_basic[j]) continue;
        const double a = std::abs(s.tab.at(i, j));
        if (a > best_abs) { best_abs = a; best = j; }
      }
      if (best < 0) continue;  // redundant row
      const int out_col = s.basis[i];
      s.is_basic[out_col] = 0;
      s.at_upper[out_col] = 0;
      s.beta[i] = s.at_upper[best] ? s.upper[best] : 0.0;
      s.d.assign(cols, 0.0);
      pivot(s, i, best);
      s.basis[i] = best;
      s.is_basic[best] = 1;
      s.at_upper[best] = 0;
    }
  }

  std::vector<double> cost(cols, 0.0);
  for (int j = 0; j < n; ++j) cost[j] = model.variables()[j].cost;
  const SolveStatus st = run_simplex(s, cost, opt);
  refresh_beta(s);
  out.iterations = s.iterations;
  if (st != SolveStatus::Optimal) {
    out.status = st;
    return out;
  }

  std::vector<double> value(cols, 0.0);
  for (int j = 0; j < cols; ++j)
    if (!s.is_basic[j] && s.at_upper[j]) value[j] = s.upper[j];
  for (int i = 0; i < m; ++i) value[s.basis[i]] = s.beta[i];
  out.values.resize(n);
  for (int j = 0; j < n; ++j) {
    double v = value[j];
    if (std::isfinite(s.upper[j])) v = std::min(v, s.upper[j]);
    out.values[j] = lower[j] + std::max(v, 0.0);
  }
  out.status = SolveStatus::Optimal;
  out.objective = model.objective_value(out.values);
  out.bound = out.objective;
  return out;
}

}  // namespace restore::opt
