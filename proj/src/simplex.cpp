#include "reluverify/simplex.hpp"

#include <cmath>

namespace rv::simplex {

namespace {

struct Tableau {
  // rows: m constraint rows, then the objective row
  // cols: n structural + m artificial columns, then the rhs
  MatrixXd t;
  std::vector<int> basis;  // basic variable per constraint row
  int m, n;                // constraints, structural columns
  int64_t pivots = 0;

  double& at(int r, int c) { return t(r, c); }
  double rhs(int r) const { return t(r, n + m); }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int r = 0; r <= m; ++r) {
      if (r == row) continue;
      const double f = t(r, col);
      if (f != 0.0) t.row(r) -= f * t.row(row);
    }
    basis[row] = col;
    ++pivots;
  }

  /// Bland's rule: entering = lowest-index column with negative reduced
  /// cost, leaving = lowest-index basic variable among the ratio-test ties.
  /// `allow` limits the entering columns (phase 2 excludes artificials).
  enum class Step { kPivoted, kOptimal, kUnbounded };
  Step step(int allow_cols) {
    int col = -1;
    for (int c = 0; c < allow_cols; ++c) {
      if (t(m, c) < -kOptTol) {
        col = c;
        break;
      }
    }
    if (col < 0) return Step::kOptimal;
    int row = -1;
    double best_ratio = 0.0;
    for (int r = 0; r < m; ++r) {
      if (t(r, col) <= kPivotTol) continue;
      const double ratio = rhs(r) / t(r, col);
      if (row < 0 || ratio < best_ratio - kPivotTol ||
          (std::abs(ratio - best_ratio) <= kPivotTol &&
           basis[r] < basis[row])) {
        row = r;
        best_ratio = ratio;
      }
    }
    if (row < 0) return Step::kUnbounded;
    pivot(row, col);
    return Step::kPivoted;
  }
};

}  // namespace

Result solve_standard(const StandardLP& lp) {
  const int m = static_cast<int>(lp.A.rows());
  const int n = static_cast<int>(lp.A.cols());
  Result res;

  Tableau tb;
  tb.m = m;
  tb.n = n;
  tb.t = MatrixXd::Zero(m + 1, n + m + 1);
  tb.basis.resize(m);
  for (int r = 0; r < m; ++r) {
    const double sgn = lp.b[r] < 0.0 ? -1.0 : 1.0;
    tb.t.block(r, 0, 1, n) = sgn * lp.A.row(r);
    tb.t(r, n + m) = sgn * lp.b[r];
    tb.t(r, n + r) = 1.0;
    tb.basis[r] = n + r;
  }
  // phase 1: minimize the sum of artificials; objective row starts as
  // -(sum of constraint rows) so reduced costs match the artificial basis
  for (int r = 0; r < m; ++r) tb.t.row(m) -= tb.t.row(r);
  for (int r = 0; r < m; ++r) tb.t(m, n + r) = 0.0;

  while (true) {
    if (tb.pivots > kMaxPivots) {
      res.status = Status::kNumericalFailure;
      res.message = "pivot limit reached in phase 1";
      res.pivots = tb.pivots;
      return res;
    }
    auto s = tb.step(n + m);
    if (s == Tableau::Step::kOptimal) break;
    if (s == Tableau::Step::kUnbounded) {
      res.status = Status::kNumericalFailure;
      res.message = "phase 1 unbounded";
      res.pivots = tb.pivots;
      return res;
    }
  }
  const double phase1 = -tb.t(m, n + m);
  if (phase1 > kFeasTol) {
    res.status = Status::kInfeasible;
    res.pivots = tb.pivots;
    return res;
  }

  // drive surviving artificials out of the basis; a row with no structural
  // pivot candidate is redundant and gets neutralized
  std::vector<bool> dead_row(m, false);
  for (int r = 0; r < m; ++r) {
    if (tb.basis[r] < n) continue;
    int col = -1;
    for (int c = 0; c < n; ++c) {
      if (std::abs(tb.t(r, c)) > kPivotTol) {
        col = c;
        break;
      }
    }
    if (col >= 0) {
      tb.pivot(r, col);
    } else {
      dead_row[r] = true;
      tb.t.row(r).setZero();
    }
  }

  // phase 2 objective
  tb.t.row(m).setZero();
  tb.t.block(m, 0, 1, n) = lp.c.transpose();
  for (int r = 0; r < m; ++r) {
    if (dead_row[r] || tb.basis[r] >= n) continue;
    const double f = tb.t(m, tb.basis[r]);
    if (f != 0.0) tb.t.row(m) -= f * tb.t.row(r);
  }

  while (true) {
    if (tb.pivots > kMaxPivots) {
      res.status = Status::kNumericalFailure;
      res.message = "pivot limit reached in phase 2";
      res.pivots = tb.pivots;
      return res;
    }
    auto s = tb.step(n);
    if (s == Tableau::Step::kOptimal) break;
    if (s == Tableau::Step::kUnbounded) {
      res.status = Status::kNumericalFailure;
      res.message = "objective unbounded below";
      res.pivots = tb.pivots;
      return res;
    }
  }

  res.status = Status::kOptimal;
  res.x = VectorXd::Zero(n);
  for (int r = 0; r < m; ++r) {
    if (!dead_row[r] && tb.basis[r] < n) res.x[tb.basis[r]] = tb.rhs(r);
  }
  res.value = lp.c.dot(res.x);
  res.pivots = tb.pivots;
  return res;
}

}  // namespace rv::simplex
