#pragma once

#include <vector>

#include "reluverify/boundprop.hpp"

namespace rv {

struct OptimizerConfig {
  int iterations = 100;
  double step_size = 0.1;
  /// Multiplicative step decay per iteration, in (0, 1].
  double decay = 0.98;
  /// Stop after this many consecutive non-improving iterations; <= 0 keeps
  /// iterating to the configured count.
  int early_stop_no_improve = 5;
  /// Stop as soon as the best lower bound exceeds zero.
  bool early_stop_verified = true;
  /// Keep intermediate bounds fixed at the values supplied via
  /// BoundOptions::reuse_bounds (or computed once at the starting slopes);
  /// only the output relaxation then depends on the slopes.
  bool frozen_intermediate = false;

  void validate() const;
};

struct GradResult {
  double value = 0.0;
  VectorXd grad;
  bool empty = false;
  uint64_t fingerprint = 0;
};

/// Value f_lb and total derivative d f_lb / d alpha through the whole
/// bound computation, including alpha-dependent intermediate bounds.
GradResult grad_lower_bound(const Network& net, const SplitAssignment& splits,
                            const AlphaParams& alpha, const Box& box,
                            const BoundOptions& opts = {});

struct OptimizeResult {
  AlphaParams alpha;       // best iterate
  double f_lb = 0.0;       // best lower bound seen
  BoundResult bound;       // full bound result at the best iterate
  std::vector<double> trace;       // raw f_lb per evaluated iterate
  std::vector<double> best_trace;  // running maximum of `trace`
  bool empty = false;
  int iterations_run = 0;
};

OptimizeResult optimize_alpha(const Network& net, const SplitAssignment& splits,
                              const AlphaParams& alpha0, const Box& box,
                              const OptimizerConfig& cfg,
                              const BoundOptions& opts = {});

struct OptimizeTask {
  SplitAssignment splits;
  AlphaParams alpha0;
  BoundOptions opts;
};

std::vector<OptimizeResult> batch_optimize_alpha(
    const Network& net, const std::vector<OptimizeTask>& tasks, const Box& box,
    const OptimizerConfig& cfg, int threads = 1);

}  // namespace rv
