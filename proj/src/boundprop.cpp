#include "reluverify/boundprop.hpp"

#include <cmath>

namespace rv {

SplitAssignment SplitAssignment::all_free(const Network& net) {
  SplitAssignment s;
  s.states_.resize(net.num_hidden_layers());
  for (int i = 0; i < net.num_hidden_layers(); ++i)
    s.states_[i].assign(net.hidden_size(i), 0);
  return s;
}

int SplitAssignment::count_assigned() const {
  int n = 0;
  for (const auto& layer : states_)
    for (int8_t v : layer) n += (v != 0);
  return n;
}

std::string SplitAssignment::key() const {
  std::string k;
  k.reserve(states_.size() * 8);
  for (const auto& layer : states_) {
    for (int8_t v : layer) k.push_back(v == 0 ? 'F' : (v > 0 ? 'P' : 'N'));
    k.push_back('|');
  }
  return k;
}

ReluRelaxation relu_relaxation(double l, double u, double alpha,
                               SplitState state) {
  if (l > u)
    throw InvariantError("relu_relaxation: invalid bounds l > u (" +
                         std::to_string(l) + " > " + std::to_string(u) + ")");
  if (state == SplitState::kNeg || u <= 0.0) return {0.0, 0.0, 0.0, 0.0};
  if (state == SplitState::kPos || l >= 0.0) return {1.0, 0.0, 1.0, 0.0};
  const double slope = u / (u - l);
  return {alpha, 0.0, slope, -u * l / (u - l)};
}

AlphaParams AlphaParams::heuristic(const Network& net,
                                   const SplitAssignment& splits,
                                   const IntermediateBounds& ib) {
  AlphaParams a;
  a.values_.resize(net.num_hidden_layers());
  for (int i = 0; i < net.num_hidden_layers(); ++i) {
    const int n = net.hidden_size(i);
    a.values_[i].resize(n);
    for (int j = 0; j < n; ++j) {
      const double l = ib.lower[i][j], u = ib.upper[i][j];
      a.values_[i][j] = (u >= std::abs(l)) ? 1.0 : 0.0;
      if (splits.get(i, j) == SplitState::kFree && l < 0.0 && u > 0.0)
        a.support_.emplace_back(i, j);
    }
  }
  return a;
}

AlphaParams AlphaParams::dense_default(const Network& net) {
  AlphaParams a;
  a.values_.resize(net.num_hidden_layers());
  for (int i = 0; i < net.num_hidden_layers(); ++i)
    a.values_[i] = VectorXd::Zero(net.hidden_size(i));
  return a;
}

AlphaParams AlphaParams::restricted(const Network& net,
                                    const SplitAssignment& splits,
                                    const IntermediateBounds& ib) const {
  AlphaParams a = heuristic(net, splits, ib);
  for (int i = 0; i < num_layers(); ++i)
    for (int j = 0; j < values_[i].size(); ++j) a.values_[i][j] = values_[i][j];
  return a;
}

VectorXd AlphaParams::flat() const {
  VectorXd v(support_.size());
  for (size_t k = 0; k < support_.size(); ++k)
    v[k] = values_[support_[k].first][support_[k].second];
  return v;
}

void AlphaParams::set_flat(const VectorXd& v) {
  if (v.size() != static_cast<long>(support_.size()))
    throw DimensionError("alpha flat view has wrong length");
  for (size_t k = 0; k < support_.size(); ++k) {
    double x = std::min(1.0, std::max(0.0, v[k]));
    values_[support_[k].first][support_[k].second] = x;
  }
}

std::pair<VectorXd, VectorXd> concretize(const LinearBounds& lb,
                                         const Box& box) {
  box.validate();
  if (lb.A_low.cols() != box.dim() || lb.A_up.cols() != box.dim())
    throw DimensionError("concretize: box dimension does not match bounds");
  const int rows = static_cast<int>(lb.A_low.rows());
  VectorXd lo(rows), hi(rows);
  for (int k = 0; k < rows; ++k) {
    double lsum = lb.b_low[k], usum = lb.b_up[k];
    for (int d = 0; d < box.dim(); ++d) {
      const double al = lb.A_low(k, d);
      lsum += al >= 0.0 ? al * box.lo[d] : al * box.hi[d];
      const double au = lb.A_up(k, d);
      usum += au >= 0.0 ? au * box.hi[d] : au * box.lo[d];
    }
    lo[k] = lsum;
    hi[k] = usum;
  }
  return {lo, hi};
}

namespace detail {

namespace {
MatrixXd as_col(const VectorXd& v) {
  return Eigen::Map<const MatrixXd>(v.data(), v.size(), 1);
}
}  // namespace

BoundGraph::BoundGraph(const Network& net_, const SplitAssignment& splits_,
                       const AlphaParams& alpha_, const Box& box_,
                       const BoundOptions& opts_, bool alpha_as_params_)
    : net(net_),
      splits(splits_),
      alpha_in(alpha_),
      box(box_),
      opts(opts_),
      alpha_as_params(alpha_as_params_) {
  box.validate();
  if (box.dim() != net.input_dim())
    throw DimensionError("bound computation: box dimension " +
                         std::to_string(box.dim()) + " vs network input " +
                         std::to_string(net.input_dim()));
  const int h = net.num_hidden_layers();
  alpha_vars.resize(h);
  lo_v.resize(h);
  up_v.resize(h);
  a_low.resize(h);
  b_low.resize(h);
  a_up.resize(h);
  b_up.resize(h);
  a_low_h.resize(h);
  b_low_h.resize(h);
  relax_built.assign(h, false);
  lambda.resize(h);
  for (int i = 0; i < h; ++i) {
    MatrixXd av = as_col(alpha_in.layer_values(i));
    alpha_vars[i] = alpha_as_params ? tape.param(av) : tape.constant(av);
  }
}

void BoundGraph::build_relaxation(int layer) {
  if (relax_built[layer]) return;
  if (!lo_v[layer].valid())
    throw InvariantError("missing intermediate bounds for layer " +
                         std::to_string(layer));
  const int n = net.hidden_size(layer);
  const VectorXd lv = lo_v[layer].val().col(0);
  const VectorXd uv = up_v[layer].val().col(0);
  VectorXd m_act = VectorXd::Zero(n), m_unst = VectorXd::Zero(n);
  VectorXd alpha_heur = VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    if (lv[j] > uv[j])
      throw InvariantError("invalid bounds l > u at layer " +
                           std::to_string(layer) + " neuron " +
                           std::to_string(j));
    const SplitState st = splits.get(layer, j);
    if (st == SplitState::kNeg || uv[j] <= 0.0) {
      // inactive: both masks stay zero
    } else if (st == SplitState::kPos || lv[j] >= 0.0) {
      m_act[j] = 1.0;
    } else {
      m_unst[j] = 1.0;
      alpha_heur[j] = (uv[j] >= std::abs(lv[j])) ? 1.0 : 0.0;
    }
  }
  fingerprint = ad::hash_mask(fingerprint, as_col(m_act));
  fingerprint = ad::hash_mask(fingerprint, as_col(m_unst));

  ad::Var act_c = tape.constant(as_col(m_act));
  ad::Var unst_c = tape.constant(as_col(m_unst));
  ad::Var zeros = tape.constant(MatrixXd::Zero(n, 1));

  a_low[layer] = tape.add(act_c, tape.cwise_mul(alpha_vars[layer], unst_c));
  b_low[layer] = zeros;
  // denom is (u - l) on unstable neurons and 1 elsewhere so the division
  // stays well defined when a stable neuron has l == u
  ad::Var denom = tape.add(
      tape.cwise_mul(tape.sub(up_v[layer], lo_v[layer]), unst_c),
      tape.constant(as_col(VectorXd::Ones(n) - m_unst)));
  a_up[layer] = tape.add(
      act_c, tape.cwise_div(tape.cwise_mul(up_v[layer], unst_c), denom));
  b_up[layer] = tape.cwise_div(
      tape.neg(tape.cwise_mul(tape.cwise_mul(up_v[layer], lo_v[layer]), unst_c)),
      denom);
  a_low_h[layer] =
      tape.constant(as_col(VectorXd(m_act + m_unst.cwiseProduct(alpha_heur))));
  b_low_h[layer] = zeros;
  relax_built[layer] = true;
}

BoundGraph::Pass BoundGraph::backward_to_input(int target_layer, int side,
                                               bool heuristic_alpha,
                                               bool record_lambda) {
  const AffineLayer& tl = net.layer(target_layer);
  ad::Var A = tape.constant(tl.weight);
  ad::Var c = tape.constant(as_col(tl.bias));
  for (int i = target_layer - 1; i >= 0; --i) {
    build_relaxation(i);
    if (record_lambda && A.rows() == 1) lambda[i] = A.val().row(0).transpose();
    const int n = net.hidden_size(i);
    MatrixXd pos_mask(A.rows(), n);
    for (int r = 0; r < A.rows(); ++r)
      for (int j = 0; j < n; ++j) pos_mask(r, j) = A.val()(r, j) >= 0.0 ? 1.0 : 0.0;
    fingerprint = ad::hash_mask(fingerprint, pos_mask);
    ad::Var pos = tape.cwise_mul(A, tape.constant(pos_mask));
    ad::Var neg = tape.cwise_mul(
        A, tape.constant(MatrixXd(MatrixXd::Ones(A.rows(), n) - pos_mask)));
    ad::Var al = heuristic_alpha ? a_low_h[i] : a_low[i];
    ad::Var bl = heuristic_alpha ? b_low_h[i] : b_low[i];
    if (side > 0) {
      c = tape.add(c, tape.add(tape.matmul(pos, bl), tape.matmul(neg, b_up[i])));
      A = tape.add(tape.scale_cols(pos, al), tape.scale_cols(neg, a_up[i]));
    } else {
      c = tape.add(c, tape.add(tape.matmul(pos, b_up[i]), tape.matmul(neg, bl)));
      A = tape.add(tape.scale_cols(pos, a_up[i]), tape.scale_cols(neg, al));
    }
    const AffineLayer& prev = net.layer(i);
    c = tape.add(c, tape.matmul(A, tape.constant(as_col(prev.bias))));
    A = tape.matmul(A, tape.constant(prev.weight));
  }
  return {A, c};
}

ad::Var BoundGraph::concretize_var(ad::Var A, ad::Var c, int side) {
  const int rows = A.rows(), d = A.cols();
  MatrixXd corner(rows, d), sign_mask(rows, d);
  for (int r = 0; r < rows; ++r) {
    for (int j = 0; j < d; ++j) {
      const bool nonneg = A.val()(r, j) >= 0.0;
      sign_mask(r, j) = nonneg ? 1.0 : 0.0;
      if (side > 0)
        corner(r, j) = nonneg ? box.lo[j] : box.hi[j];
      else
        corner(r, j) = nonneg ? box.hi[j] : box.lo[j];
    }
  }
  fingerprint = ad::hash_mask(fingerprint, sign_mask);
  return tape.add(tape.rowsum(tape.cwise_mul(A, tape.constant(corner))), c);
}

bool BoundGraph::prepare() {
  const int h = net.num_hidden_layers();
  ib_values.lower.resize(h);
  ib_values.upper.resize(h);
  for (int i = 0; i < h; ++i) {
    if (opts.reuse_bounds && i < opts.reuse_below_layer) {
      const IntermediateBounds& rb = *opts.reuse_bounds;
      if (i >= rb.num_layers())
        throw InvariantError("missing intermediate bounds for layer " +
                             std::to_string(i));
      lo_v[i] = tape.constant(as_col(rb.lower[i]));
      up_v[i] = tape.constant(as_col(rb.upper[i]));
    } else {
      Pass pl = backward_to_input(i, +1, opts.heuristic_lower_slopes, false);
      Pass pu = backward_to_input(i, -1, opts.heuristic_lower_slopes, false);
      ad::Var lraw = concretize_var(pl.A, pl.c, +1);
      ad::Var uraw = concretize_var(pu.A, pu.c, -1);
      const int n = net.hidden_size(i);
      VectorXd keep_l = VectorXd::Ones(n), keep_u = VectorXd::Ones(n);
      for (int j = 0; j < n; ++j) {
        const SplitState st = splits.get(i, j);
        if (st == SplitState::kPos && lraw.val()(j, 0) < 0.0) keep_l[j] = 0.0;
        if (st == SplitState::kNeg && uraw.val()(j, 0) > 0.0) keep_u[j] = 0.0;
      }
      fingerprint = ad::hash_mask(fingerprint, as_col(keep_l));
      fingerprint = ad::hash_mask(fingerprint, as_col(keep_u));
      lo_v[i] = tape.cwise_mul(lraw, tape.constant(as_col(keep_l)));
      up_v[i] = tape.cwise_mul(uraw, tape.constant(as_col(keep_u)));
    }
    ib_values.lower[i] = lo_v[i].val().col(0);
    ib_values.upper[i] = up_v[i].val().col(0);
    for (int j = 0; j < net.hidden_size(i); ++j) {
      if (ib_values.lower[i][j] > ib_values.upper[i][j]) {
        empty = true;
        empty_layer = i;
        return false;
      }
    }
  }
  return true;
}

void BoundGraph::finish_output() {
  const int out = net.num_layers() - 1;
  Pass pl = backward_to_input(out, +1, opts.heuristic_lower_slopes, true);
  Pass pu = backward_to_input(
      out, -1, opts.heuristic_lower_slopes || !opts.upper_output_with_alpha,
      false);
  f_lb_var = concretize_var(pl.A, pl.c, +1);
  f_ub_var = concretize_var(pu.A, pu.c, -1);
  out_A_low = pl.A.val();
  out_A_up = pu.A.val();
  out_b_low = pl.c.val()(0, 0);
  out_b_up = pu.c.val()(0, 0);
}

bool BoundGraph::run() {
  if (!prepare()) return false;
  finish_output();
  return true;
}

BoundResult BoundGraph::result() const {
  BoundResult r;
  r.ibounds = ib_values;
  r.empty = empty;
  r.fingerprint = fingerprint;
  if (empty) {
    r.f_lb = std::numeric_limits<double>::infinity();
    r.f_ub = -std::numeric_limits<double>::infinity();
    return r;
  }
  r.f_lb = f_lb_var.val()(0, 0);
  r.f_ub = f_ub_var.val()(0, 0);
  r.output_bounds.A_low = out_A_low;
  r.output_bounds.A_up = out_A_up;
  r.output_bounds.b_low = VectorXd::Constant(1, out_b_low);
  r.output_bounds.b_up = VectorXd::Constant(1, out_b_up);
  r.lambda = lambda;
  r.lower_argmin.resize(net.input_dim());
  for (int d = 0; d < net.input_dim(); ++d)
    r.lower_argmin[d] = out_A_low(0, d) >= 0.0 ? box.lo[d] : box.hi[d];
  return r;
}

VectorXd BoundGraph::alpha_grad() {
  if (empty) throw InvariantError("alpha_grad on empty domain");
  tape.backward(f_lb_var);
  const auto& sup = alpha_in.support();
  VectorXd g(sup.size());
  for (size_t k = 0; k < sup.size(); ++k)
    g[k] = alpha_vars[sup[k].first].grad()(sup[k].second, 0);
  return g;
}

}  // namespace detail

LinearBounds backward_bounds(const Network& net, const SplitAssignment& splits,
                             const IntermediateBounds& ibounds,
                             const AlphaParams& alpha, int target_layer) {
  if (target_layer < 0 || target_layer >= net.num_layers())
    throw InvariantError("backward_bounds: target layer out of range");
  BoundOptions opts;
  opts.reuse_bounds = &ibounds;
  opts.reuse_below_layer = target_layer;
  detail::BoundGraph g(net, splits, alpha, Box{VectorXd::Zero(net.input_dim()),
                                               VectorXd::Zero(net.input_dim())},
                       opts, false);
  for (int i = 0; i < target_layer; ++i) {
    if (i >= ibounds.num_layers())
      throw InvariantError("missing intermediate bounds for layer " +
                           std::to_string(i));
    g.lo_v[i] = g.tape.constant(
        Eigen::Map<const MatrixXd>(ibounds.lower[i].data(),
                                   ibounds.lower[i].size(), 1));
    g.up_v[i] = g.tape.constant(
        Eigen::Map<const MatrixXd>(ibounds.upper[i].data(),
                                   ibounds.upper[i].size(), 1));
  }
  auto pl = g.backward_to_input(target_layer, +1, false, false);
  auto pu = g.backward_to_input(target_layer, -1, false, false);
  LinearBounds lb;
  lb.A_low = pl.A.val();
  lb.b_low = pl.c.val().col(0);
  lb.A_up = pu.A.val();
  lb.b_up = pu.c.val().col(0);
  return lb;
}

IntermediateResult compute_intermediate_bounds(const Network& net,
                                               const SplitAssignment& splits,
                                               const AlphaParams& alpha,
                                               const Box& box,
                                               const BoundOptions& opts) {
  detail::BoundGraph g(net, splits, alpha, box, opts, false);
  IntermediateResult res;
  if (net.num_hidden_layers() == 0) return res;
  g.prepare();
  res.ibounds = g.ib_values;
  res.empty = g.empty;
  if (res.empty) {
    res.ibounds.lower.resize(g.empty_layer + 1);
    res.ibounds.upper.resize(g.empty_layer + 1);
  }
  return res;
}

BoundResult compute_output_bounds(const Network& net,
                                  const SplitAssignment& splits,
                                  const AlphaParams& alpha, const Box& box,
                                  const BoundOptions& opts) {
  if (net.output_dim() != 1)
    throw InvariantError(
        "compute_output_bounds expects a scalar-output network");
  detail::BoundGraph g(net, splits, alpha, box, opts, false);
  g.run();
  return g.result();
}

std::vector<BoundResult> batch_output_bounds(const Network& net,
                                             const std::vector<DomainSpec>& domains,
                                             const Box& box, int threads) {
  if (domains.empty())
    throw InvariantError("batch_output_bounds: empty domain list");
  std::vector<BoundResult> out(domains.size());
  parallel_for(static_cast<int>(domains.size()), threads, [&](int i) {
    out[i] = compute_output_bounds(net, domains[i].splits, domains[i].alpha,
                                   box, domains[i].opts);
  });
  return out;
}

}  // namespace rv
