#include "reluverify/lp.hpp"

#include <cmath>
#include <sstream>

namespace rv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int LPProblem::add_var(const std::string& name, double lb, double ub) {
  const int idx = num_vars();
  var_names.push_back(name);
  var_lb.conservativeResize(idx + 1);
  var_ub.conservativeResize(idx + 1);
  var_lb[idx] = lb;
  var_ub[idx] = ub;
  for (auto& r : rows) {
    r.coeffs.conservativeResize(idx + 1);
    r.coeffs[idx] = 0.0;
  }
  if (objective.size() > 0) {
    objective.conservativeResize(idx + 1);
    objective[idx] = 0.0;
  }
  return idx;
}

void LPProblem::add_row(LPRow row) {
  if (row.coeffs.size() != num_vars())
    throw InvariantError("lp row width does not match variable count");
  rows.push_back(std::move(row));
}

void LPProblem::validate() const {
  if (objective.size() != num_vars())
    throw InvariantError("lp objective width does not match variable count");
  for (const auto& r : rows)
    if (r.coeffs.size() != num_vars())
      throw InvariantError("lp row width does not match variable count");
  for (int j = 0; j < num_vars(); ++j)
    if (var_lb[j] > var_ub[j])
      throw InvariantError("lp variable " + var_names[j] + " has lb > ub");
}

double LPProblem::max_violation(const VectorXd& v) const {
  double worst = 0.0;
  for (const auto& r : rows) {
    const double lhs = r.coeffs.dot(v);
    double viol = 0.0;
    if (r.rel == Rel::kLe) viol = lhs - r.rhs;
    else if (r.rel == Rel::kGe) viol = r.rhs - lhs;
    else viol = std::abs(lhs - r.rhs);
    worst = std::max(worst, viol);
  }
  for (int j = 0; j < num_vars(); ++j) {
    if (std::isfinite(var_lb[j])) worst = std::max(worst, var_lb[j] - v[j]);
    if (std::isfinite(var_ub[j])) worst = std::max(worst, v[j] - var_ub[j]);
  }
  return worst;
}

std::string LPProblem::dump() const {
  std::ostringstream os;
  os.precision(17);
  auto term = [&](double c, int j, bool first) {
    std::ostringstream t;
    t.precision(17);
    if (c >= 0.0)
      t << (first ? "" : "+ ") << c;
    else
      t << "- " << -c;
    t << " " << var_names[j] << " ";
    return t.str();
  };
  os << "Minimize\n obj: ";
  bool first = true;
  for (int j = 0; j < num_vars(); ++j) {
    if (objective[j] == 0.0) continue;
    os << term(objective[j], j, first);
    first = false;
  }
  if (first) os << "0";
  os << "\nSubject To\n";
  int idx = 0;
  for (const auto& r : rows) {
    os << " " << (r.name.empty() ? "r" + std::to_string(idx) : r.name) << ": ";
    first = true;
    for (int j = 0; j < num_vars(); ++j) {
      if (r.coeffs[j] == 0.0) continue;
      os << term(r.coeffs[j], j, first);
      first = false;
    }
    if (first) os << "0 ";
    os << (r.rel == Rel::kLe ? "<= " : r.rel == Rel::kGe ? ">= " : "= ");
    os << r.rhs << "\n";
    ++idx;
  }
  os << "Bounds\n";
  for (int j = 0; j < num_vars(); ++j) {
    const bool lb = std::isfinite(var_lb[j]), ub = std::isfinite(var_ub[j]);
    if (!lb && !ub) {
      os << " " << var_names[j] << " free\n";
    } else {
      os << " ";
      if (lb) os << var_lb[j] << " <= ";
      else os << "-inf <= ";
      os << var_names[j];
      if (ub) os << " <= " << var_ub[j];
      os << "\n";
    }
  }
  os << "End\n";
  return os.str();
}

LPOutcome solve_lp(const LPProblem& prob) {
  prob.validate();
  const int nv = prob.num_vars();

  // standard-form conversion: shift/negate/split variables so every
  // standard column is nonnegative, turn bounded-both variables into an
  // extra <= row, add a slack per inequality row
  struct ColMap {
    int col = -1;       // first standard column
    int neg_col = -1;   // second column when the variable is free
    double shift = 0.0; // x = shift + y  (or x = shift - y when negated)
    bool negated = false;
  };
  std::vector<ColMap> map(nv);
  int ncols = 0;
  std::vector<std::pair<int, double>> range_rows;  // (var, ub-lb)
  for (int j = 0; j < nv; ++j) {
    const double lb = prob.var_lb[j], ub = prob.var_ub[j];
    ColMap cm;
    if (std::isfinite(lb)) {
      cm.col = ncols++;
      cm.shift = lb;
      if (std::isfinite(ub)) range_rows.push_back({j, ub - lb});
    } else if (std::isfinite(ub)) {
      cm.col = ncols++;
      cm.shift = ub;
      cm.negated = true;
    } else {
      cm.col = ncols++;
      cm.neg_col = ncols++;
    }
    map[j] = cm;
  }

  const int n_rows = static_cast<int>(prob.rows.size());
  const int n_range = static_cast<int>(range_rows.size());
  int n_slack = n_range;  // range rows are <=
  for (const auto& r : prob.rows)
    if (r.rel != Rel::kEq) ++n_slack;

  const int m = n_rows + n_range;
  const int n_std = ncols + n_slack;
  simplex::StandardLP std_lp;
  std_lp.A = MatrixXd::Zero(m, n_std);
  std_lp.b = VectorXd::Zero(m);
  std_lp.c = VectorXd::Zero(n_std);

  auto put = [&](int row, int var, double coef) {
    const ColMap& cm = map[var];
    const double sgn = cm.negated ? -1.0 : 1.0;
    std_lp.A(row, cm.col) += sgn * coef;
    if (cm.neg_col >= 0) std_lp.A(row, cm.neg_col) -= coef;
    std_lp.b[row] -= coef * cm.shift;
  };

  int slack = ncols;
  for (int r = 0; r < n_rows; ++r) {
    const LPRow& row = prob.rows[r];
    std_lp.b[r] = row.rhs;
    for (int j = 0; j < nv; ++j)
      if (row.coeffs[j] != 0.0) put(r, j, row.coeffs[j]);
    if (row.rel == Rel::kLe) std_lp.A(r, slack++) = 1.0;
    else if (row.rel == Rel::kGe) std_lp.A(r, slack++) = -1.0;
  }
  for (int k = 0; k < n_range; ++k) {
    const int r = n_rows + k;
    std_lp.b[r] = range_rows[k].second;
    const ColMap& cm = map[range_rows[k].first];
    std_lp.A(r, cm.col) = 1.0;  // y <= ub - lb
    std_lp.A(r, slack++) = 1.0;
  }
  for (int j = 0; j < nv; ++j) {
    if (prob.objective[j] == 0.0) continue;
    const ColMap& cm = map[j];
    const double sgn = cm.negated ? -1.0 : 1.0;
    std_lp.c[cm.col] += sgn * prob.objective[j];
    if (cm.neg_col >= 0) std_lp.c[cm.neg_col] -= prob.objective[j];
  }

  simplex::Result sr = simplex::solve_standard(std_lp);
  LPOutcome out;
  out.pivots = sr.pivots;
  out.message = sr.message;
  switch (sr.status) {
    case simplex::Status::kInfeasible:
      out.status = LPStatus::kInfeasible;
      return out;
    case simplex::Status::kNumericalFailure:
      out.status = LPStatus::kNumericalFailure;
      return out;
    case simplex::Status::kOptimal:
      break;
  }
  out.status = LPStatus::kOptimal;
  out.point = VectorXd::Zero(nv);
  for (int j = 0; j < nv; ++j) {
    const ColMap& cm = map[j];
    double y = sr.x[cm.col];
    if (cm.neg_col >= 0) y -= sr.x[cm.neg_col];
    out.point[j] = cm.negated ? cm.shift - y : cm.shift + y;
  }
  // objective constant from shifts
  out.value = prob.objective.dot(out.point);
  return out;
}

LPProblem build_lp(const Network& net, const SplitAssignment& splits,
                   const IntermediateBounds& ibounds, const Box& box) {
  box.validate();
  if (box.dim() != net.input_dim())
    throw DimensionError("build_lp: box dimension does not match network");
  const int hidden = net.num_hidden_layers();
  if (ibounds.num_layers() < hidden)
    throw InvariantError("build_lp: missing intermediate bounds");

  LPProblem p;
  std::vector<int> x_vars(net.input_dim());
  for (int d = 0; d < net.input_dim(); ++d)
    x_vars[d] = p.add_var("x" + std::to_string(d), box.lo[d], box.hi[d]);

  std::vector<std::vector<int>> h_vars(hidden), g_vars(hidden);
  for (int i = 0; i < hidden; ++i) {
    const int n = net.hidden_size(i);
    h_vars[i].resize(n);
    g_vars[i].resize(n);
    for (int j = 0; j < n; ++j) {
      const std::string sfx = std::to_string(i) + "_" + std::to_string(j);
      h_vars[i][j] = p.add_var("h" + sfx);
      g_vars[i][j] = p.add_var("g" + sfx);
    }
  }
  const int out_var = p.add_var("f");
  p.objective = VectorXd::Zero(p.num_vars());
  p.objective[out_var] = 1.0;

  const int nv = p.num_vars();
  auto affine_rows = [&](int layer, const std::vector<int>& outs,
                         const std::vector<int>& ins) {
    const AffineLayer& L = net.layer(layer);
    for (int r = 0; r < L.out_dim(); ++r) {
      LPRow row;
      row.coeffs = VectorXd::Zero(nv);
      row.coeffs[outs[r]] = 1.0;
      for (int c = 0; c < L.in_dim(); ++c)
        row.coeffs[ins[c]] -= L.weight(r, c);
      row.rel = Rel::kEq;
      row.rhs = L.bias[r];
      row.name = "aff" + std::to_string(layer) + "_" + std::to_string(r);
      p.add_row(std::move(row));
    }
  };

  std::vector<int> prev = x_vars;
  for (int i = 0; i < hidden; ++i) {
    affine_rows(i, h_vars[i], prev);
    for (int j = 0; j < net.hidden_size(i); ++j) {
      const double l = ibounds.lower[i][j], u = ibounds.upper[i][j];
      const SplitState st = splits.get(i, j);
      const int h = h_vars[i][j], g = g_vars[i][j];
      const std::string sfx = std::to_string(i) + "_" + std::to_string(j);
      auto row_of = [&](std::initializer_list<std::pair<int, double>> terms,
                        Rel rel, double rhs, const std::string& name) {
        LPRow row;
        row.coeffs = VectorXd::Zero(nv);
        for (auto& t : terms) row.coeffs[t.first] += t.second;
        row.rel = rel;
        row.rhs = rhs;
        row.name = name;
        p.add_row(std::move(row));
      };
      if (st == SplitState::kNeg || u <= 0.0) {
        row_of({{g, 1.0}}, Rel::kEq, 0.0, "off" + sfx);
        const double margin = st == SplitState::kNeg ? kNegSplitMargin : 0.0;
        row_of({{h, 1.0}}, Rel::kLe, -margin, "sgn" + sfx);
      } else if (st == SplitState::kPos || l >= 0.0) {
        row_of({{g, 1.0}, {h, -1.0}}, Rel::kEq, 0.0, "on" + sfx);
        row_of({{h, 1.0}}, Rel::kGe, 0.0, "sgn" + sfx);
      } else {
        if (!(l < 0.0 && u > 0.0))
          throw InvariantError("build_lp: inconsistent bounds for neuron " + sfx);
        const double slope = u / (u - l);
        row_of({{g, 1.0}, {h, -1.0}}, Rel::kGe, 0.0, "tri_a" + sfx);
        row_of({{g, 1.0}}, Rel::kGe, 0.0, "tri_b" + sfx);
        row_of({{g, 1.0}, {h, -slope}}, Rel::kLe, -slope * l, "tri_c" + sfx);
      }
    }
    prev = g_vars[i];
  }
  std::vector<int> outs{out_var};
  if (net.output_dim() != 1)
    throw InvariantError("build_lp expects a scalar-output network");
  affine_rows(net.num_layers() - 1, outs, prev);
  return p;
}

LPBoundOutcome lp_bound(const Network& net, const SplitAssignment& splits,
                        const IntermediateBounds& ibounds, const Box& box) {
  LPProblem p = build_lp(net, splits, ibounds, box);
  LPBoundOutcome r;
  r.outcome = solve_lp(p);
  if (r.outcome.status == LPStatus::kOptimal) {
    r.input_point = r.outcome.point.head(net.input_dim());
    for (int d = 0; d < net.input_dim(); ++d)
      r.input_point[d] = std::min(box.hi[d], std::max(box.lo[d], r.input_point[d]));
  }
  return r;
}

}  // namespace rv
