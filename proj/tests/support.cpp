#include "support.hpp"

#include <cmath>

namespace rvtest {

Network linear_net(const MatrixXd& w, const VectorXd& b) {
  return Network({AffineLayer{w, b}});
}

Network make_net(const std::vector<MatrixXd>& weights,
                 const std::vector<VectorXd>& biases) {
  std::vector<AffineLayer> layers;
  for (size_t i = 0; i < weights.size(); ++i)
    layers.push_back(AffineLayer{weights[i], biases[i]});
  return Network(std::move(layers));
}

Network random_net(std::mt19937_64& rng, const RandomNetSpec& spec) {
  std::uniform_int_distribution<int> din(spec.input_dim_min, spec.input_dim_max);
  std::uniform_int_distribution<int> dl(spec.layers_min, spec.layers_max);
  std::uniform_int_distribution<int> dw(spec.width_min, spec.width_max);
  std::uniform_real_distribution<double> du(-1.0, 1.0);
  const int input = din(rng);
  const int n_layers = dl(rng);
  std::vector<MatrixXd> ws;
  std::vector<VectorXd> bs;
  int prev = input;
  for (int i = 0; i < n_layers; ++i) {
    const int rows = i + 1 == n_layers ? spec.output_dim : dw(rng);
    MatrixXd w(rows, prev);
    VectorXd b(rows);
    const double scale = 1.0 / std::sqrt(static_cast<double>(prev));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < prev; ++c) w(r, c) = du(rng) * scale;
      b[r] = du(rng) * spec.bias_scale;
    }
    ws.push_back(std::move(w));
    bs.push_back(std::move(b));
    prev = rows;
  }
  return make_net(ws, bs);
}

MatrixXd sample_box(std::mt19937_64& rng, const Box& box, int count) {
  std::uniform_real_distribution<double> du(0.0, 1.0);
  MatrixXd out(box.dim(), count);
  for (int c = 0; c < count; ++c)
    for (int d = 0; d < box.dim(); ++d)
      out(d, c) = box.lo[d] + du(rng) * (box.hi[d] - box.lo[d]);
  return out;
}

AlphaParams random_alpha(std::mt19937_64& rng, const AlphaParams& base) {
  std::uniform_real_distribution<double> du(0.0, 1.0);
  AlphaParams a = base;
  VectorXd flat = a.flat();
  for (int i = 0; i < flat.size(); ++i) flat[i] = du(rng);
  a.set_flat(flat);
  return a;
}

double affine_restriction_value(const Network& net, const VectorXd& gate_point,
                                const VectorXd& x) {
  VectorXd ref = gate_point;
  VectorXd v = x;
  for (int i = 0; i < net.num_layers(); ++i) {
    ref = net.layer(i).weight * ref + net.layer(i).bias;
    v = net.layer(i).weight * v + net.layer(i).bias;
    if (i + 1 < net.num_layers()) {
      for (int j = 0; j < v.size(); ++j) {
        if (ref[j] <= 0.0) v[j] = 0.0;
      }
      ref = ref.cwiseMax(0.0);
    }
  }
  return v[0];
}

namespace {

void gather_rows(const LPProblem& prob, std::vector<Eigen::RowVectorXd>& lhs,
                 std::vector<double>& rhs, std::vector<Rel>& rel) {
  for (const auto& r : prob.rows) {
    lhs.push_back(r.coeffs.transpose());
    rhs.push_back(r.rhs);
    rel.push_back(r.rel);
  }
  for (int j = 0; j < prob.num_vars(); ++j) {
    if (std::isfinite(prob.var_lb[j])) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(prob.num_vars());
      row[j] = 1.0;
      lhs.push_back(row);
      rhs.push_back(prob.var_lb[j]);
      rel.push_back(Rel::kGe);
    }
    if (std::isfinite(prob.var_ub[j])) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(prob.num_vars());
      row[j] = 1.0;
      lhs.push_back(row);
      rhs.push_back(prob.var_ub[j]);
      rel.push_back(Rel::kLe);
    }
  }
}

bool feasible_point(const std::vector<Eigen::RowVectorXd>& lhs,
                    const std::vector<double>& rhs,
                    const std::vector<Rel>& rel, const VectorXd& v,
                    double tol) {
  for (size_t i = 0; i < lhs.size(); ++i) {
    const double val = lhs[i].dot(v);
    if (rel[i] == Rel::kLe && val > rhs[i] + tol) return false;
    if (rel[i] == Rel::kGe && val < rhs[i] - tol) return false;
    if (rel[i] == Rel::kEq && std::abs(val - rhs[i]) > tol) return false;
  }
  return true;
}

}  // namespace

VertexOpt vertex_enumeration_min(const LPProblem& prob, double feas_tol) {
  const int n = prob.num_vars();
  std::vector<Eigen::RowVectorXd> lhs;
  std::vector<double> rhs;
  std::vector<Rel> rel;
  gather_rows(prob, lhs, rhs, rel);
  const int m = static_cast<int>(lhs.size());

  // equalities are active at every vertex; choose the rest among the others
  std::vector<int> eq_rows, ineq_rows;
  for (int i = 0; i < m; ++i)
    (rel[i] == Rel::kEq ? eq_rows : ineq_rows).push_back(i);
  const int need = n - static_cast<int>(eq_rows.size());
  VertexOpt best;
  if (need < 0) return best;

  std::vector<int> pick(need);
  std::function<void(int, int)> rec = [&](int start, int k) {
    if (k == need) {
      MatrixXd A(n, n);
      VectorXd b(n);
      int r = 0;
      for (int i : eq_rows) {
        A.row(r) = lhs[i];
        b[r] = rhs[i];
        ++r;
      }
      for (int idx = 0; idx < need; ++idx) {
        A.row(r) = lhs[pick[idx]];
        b[r] = rhs[pick[idx]];
        ++r;
      }
      Eigen::FullPivLU<MatrixXd> lu(A);
      if (!lu.isInvertible()) return;
      VectorXd v = lu.solve(b);
      if (!feasible_point(lhs, rhs, rel, v, feas_tol)) return;
      const double val = prob.objective.dot(v);
      if (!best.feasible || val < best.value) {
        best.feasible = true;
        best.value = val;
        best.point = v;
      }
      return;
    }
    for (int i = start; i < static_cast<int>(ineq_rows.size()); ++i) {
      pick[k] = ineq_rows[i];
      rec(i + 1, k + 1);
    }
  };
  rec(0, 0);
  return best;
}

std::pair<double, double> corner_extrema(const Eigen::RowVectorXd& a, double b,
                                         const Box& box) {
  const int d = box.dim();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << d); ++mask) {
    double v = b;
    for (int k = 0; k < d; ++k)
      v += a[k] * ((mask >> k) & 1 ? box.hi[k] : box.lo[k]);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace rvtest
