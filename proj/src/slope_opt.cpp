#include "reluverify/slope_opt.hpp"

namespace rv {

void OptimizerConfig::validate() const {
  if (iterations < 0) throw SchemaError("optimizer iterations must be >= 0");
  if (step_size <= 0.0) throw SchemaError("optimizer step_size must be > 0");
  if (decay <= 0.0 || decay > 1.0)
    throw SchemaError("optimizer decay must be in (0, 1]");
}

namespace {

struct Eval {
  BoundResult bound;
  VectorXd grad;
  bool empty = false;
};

Eval evaluate(const Network& net, const SplitAssignment& splits,
              const AlphaParams& alpha, const Box& box,
              const BoundOptions& opts, bool want_grad) {
  detail::BoundGraph g(net, splits, alpha, box, opts, want_grad);
  Eval e;
  if (!g.run()) {
    e.empty = true;
    e.bound = g.result();
    return e;
  }
  e.bound = g.result();
  if (want_grad) e.grad = g.alpha_grad();
  return e;
}

}  // namespace

GradResult grad_lower_bound(const Network& net, const SplitAssignment& splits,
                            const AlphaParams& alpha, const Box& box,
                            const BoundOptions& opts) {
  Eval e = evaluate(net, splits, alpha, box, opts, true);
  GradResult r;
  r.empty = e.empty;
  if (e.empty) return r;
  r.value = e.bound.f_lb;
  r.grad = e.grad;
  r.fingerprint = e.bound.fingerprint;
  return r;
}

OptimizeResult optimize_alpha(const Network& net, const SplitAssignment& splits,
                              const AlphaParams& alpha0, const Box& box,
                              const OptimizerConfig& cfg,
                              const BoundOptions& opts) {
  cfg.validate();
  OptimizeResult res;
  res.alpha = alpha0;

  BoundOptions eff = opts;
  IntermediateBounds frozen;
  if (cfg.frozen_intermediate && eff.reuse_below_layer < net.num_hidden_layers()) {
    // freeze the bounds obtained at the starting slopes
    auto ir = compute_intermediate_bounds(net, splits, alpha0, box, eff);
    if (ir.empty) {
      res.empty = true;
      res.bound.empty = true;
      res.bound.f_lb = std::numeric_limits<double>::infinity();
      res.bound.f_ub = -std::numeric_limits<double>::infinity();
      res.f_lb = res.bound.f_lb;
      return res;
    }
    frozen = std::move(ir.ibounds);
    eff.reuse_bounds = &frozen;
    eff.reuse_below_layer = net.num_hidden_layers();
  }

  const bool want_grad = cfg.iterations > 0;
  AlphaParams alpha = alpha0;
  Eval cur = evaluate(net, splits, alpha, box, eff, want_grad);
  if (cur.empty) {
    res.empty = true;
    res.bound = cur.bound;
    res.f_lb = cur.bound.f_lb;
    return res;
  }
  res.bound = cur.bound;
  res.alpha = alpha;
  res.f_lb = cur.bound.f_lb;
  res.trace.push_back(cur.bound.f_lb);
  res.best_trace.push_back(res.f_lb);

  double step = cfg.step_size;
  int no_improve = 0;
  for (int k = 1; k <= cfg.iterations; ++k) {
    if (cfg.early_stop_verified && res.f_lb > 0.0) break;
    if (cfg.early_stop_no_improve > 0 && no_improve >= cfg.early_stop_no_improve)
      break;
    if (alpha.support_size() == 0) break;

    VectorXd flat = alpha.flat() + step * cur.grad;
    alpha.set_flat(flat);
    step *= cfg.decay;

    cur = evaluate(net, splits, alpha, box, eff, true);
    res.iterations_run = k;
    if (cur.empty) {
      // a contradiction at any valid slope assignment certifies emptiness
      res.empty = true;
      res.bound = cur.bound;
      res.f_lb = cur.bound.f_lb;
      return res;
    }
    res.trace.push_back(cur.bound.f_lb);
    if (cur.bound.f_lb > res.f_lb) {
      res.f_lb = cur.bound.f_lb;
      res.bound = cur.bound;
      res.alpha = alpha;
      no_improve = 0;
    } else {
      ++no_improve;
    }
    res.best_trace.push_back(res.f_lb);
  }
  return res;
}

std::vector<OptimizeResult> batch_optimize_alpha(
    const Network& net, const std::vector<OptimizeTask>& tasks, const Box& box,
    const OptimizerConfig& cfg, int threads) {
  if (tasks.empty())
    throw InvariantError("batch_optimize_alpha: empty task list");
  std::vector<OptimizeResult> out(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), threads, [&](int i) {
    out[i] = optimize_alpha(net, tasks[i].splits, tasks[i].alpha0, box, cfg,
                            tasks[i].opts);
  });
  return out;
}

}  // namespace rv
