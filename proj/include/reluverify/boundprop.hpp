#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "reluverify/model.hpp"
#include "reluverify/tape.hpp"

namespace rv {

/// Branching state of a hidden neuron: FREE (no constraint), POS (h >= 0)
/// or NEG (h <= 0).
enum class SplitState : int8_t { kFree = 0, kPos = 1, kNeg = -1 };

/// Per hidden neuron split states for one sub-domain.
class SplitAssignment {
 public:
  SplitAssignment() = default;
  static SplitAssignment all_free(const Network& net);

  SplitState get(int layer, int j) const {
    return static_cast<SplitState>(states_[layer][j]);
  }
  void set(int layer, int j, SplitState s) {
    states_[layer][j] = static_cast<int8_t>(s);
  }
  int num_layers() const { return static_cast<int>(states_.size()); }
  int layer_size(int i) const { return static_cast<int>(states_[i].size()); }
  int count_assigned() const;

  /// Stable text key, usable as a hash/map key for tree bookkeeping.
  std::string key() const;

  bool operator==(const SplitAssignment& o) const { return states_ == o.states_; }

 private:
  std::vector<std::vector<int8_t>> states_;
};

/// Pre-activation bounds l <= h <= u per hidden layer.
struct IntermediateBounds {
  std::vector<VectorXd> lower;
  std::vector<VectorXd> upper;

  int num_layers() const { return static_cast<int>(lower.size()); }
  bool empty() const { return lower.empty(); }
};

/// Lower-relaxation slopes in [0,1], one entry per hidden neuron. The
/// support lists the neurons whose entry is live (currently unstable and
/// FREE); the flat view used by the optimizer covers exactly the support.
class AlphaParams {
 public:
  AlphaParams() = default;

  /// Slope-matching initialization: alpha = 1 if u >= |l| else 0.
  static AlphaParams heuristic(const Network& net, const SplitAssignment& splits,
                               const IntermediateBounds& ib);

  /// Dense zero-valued entries with an empty support, for bootstrap passes
  /// that run with heuristic slopes.
  static AlphaParams dense_default(const Network& net);

  /// Warm start: keep this object's values, rebuild the support for new
  /// bounds/splits (entries for newly unstable neurons fall back to the
  /// heuristic value).
  AlphaParams restricted(const Network& net, const SplitAssignment& splits,
                         const IntermediateBounds& ib) const;

  const VectorXd& layer_values(int i) const { return values_[i]; }
  double get(int layer, int j) const { return values_[layer][j]; }
  void set(int layer, int j, double v) { values_[layer][j] = v; }
  int num_layers() const { return static_cast<int>(values_.size()); }

  const std::vector<std::pair<int, int>>& support() const { return support_; }
  int support_size() const { return static_cast<int>(support_.size()); }

  VectorXd flat() const;
  /// Writes the flat view back, clamping every entry to [0,1].
  void set_flat(const VectorXd& v);

 private:
  std::vector<VectorXd> values_;
  std::vector<std::pair<int, int>> support_;
};

/// Coefficients of linear bounding functions A_low x + b_low <= h(x) and
/// h(x) <= A_up x + b_up over the input box.
struct LinearBounds {
  MatrixXd A_low;
  VectorXd b_low;
  MatrixXd A_up;
  VectorXd b_up;
};

/// Per-neuron linear relaxation coefficients (lower slope/offset, upper
/// slope/offset) for g = ReLU(h) given h in [l, u].
struct ReluRelaxation {
  double a_low;
  double b_low;
  double a_up;
  double b_up;
};

/// Relaxation cases: inactive when u <= 0 or NEG split (zero function),
/// active when l >= 0 or POS split (identity), otherwise the unstable case
/// with free lower slope alpha and chord upper bound.
ReluRelaxation relu_relaxation(double l, double u, double alpha,
                               SplitState state);

/// Exact extrema of the linear bounding functions over the box.
std::pair<VectorXd, VectorXd> concretize(const LinearBounds& lb, const Box& box);

/// Freezes bound recomputation below a layer: hidden layers i <
/// reuse_below_layer take their bounds from *reuse_bounds as constants.
struct BoundOptions {
  const IntermediateBounds* reuse_bounds = nullptr;
  int reuse_below_layer = 0;
  bool upper_output_with_alpha = false;
  /// Ignore the supplied slopes and use the per-layer heuristic everywhere
  /// (plain unoptimized bounding; also bootstraps fresh domains).
  bool heuristic_lower_slopes = false;
};

struct BoundResult {
  double f_lb = -std::numeric_limits<double>::infinity();
  double f_ub = std::numeric_limits<double>::infinity();
  LinearBounds output_bounds;
  IntermediateBounds ibounds;
  /// A split clamp produced l > u: the sub-domain is certifiably empty.
  bool empty = false;
  /// Backward coefficient reaching each hidden neuron's post-activation in
  /// the scalar lower-bound pass (branching scores are derived from it).
  std::vector<VectorXd> lambda;
  /// Hash of every selection mask in the computation; changes exactly when
  /// the active piecewise-linear region changes.
  uint64_t fingerprint = 0;
  /// Box corner minimizing the linear lower bound (witness candidate).
  VectorXd lower_argmin;
};

/// Backward propagation from `target_layer` (0-based affine layer index;
/// bounds are on that layer's pre-activations) down to the input. Requires
/// ibounds for all hidden layers below the target.
LinearBounds backward_bounds(const Network& net, const SplitAssignment& splits,
                             const IntermediateBounds& ibounds,
                             const AlphaParams& alpha, int target_layer);

struct IntermediateResult {
  IntermediateBounds ibounds;
  bool empty = false;
};

IntermediateResult compute_intermediate_bounds(const Network& net,
                                               const SplitAssignment& splits,
                                               const AlphaParams& alpha,
                                               const Box& box,
                                               const BoundOptions& opts = {});

/// Full pipeline for a scalar-output network: intermediate bounds, output
/// backward pass, concretization. The upper output bound is computed with
/// heuristic slopes unless opts.upper_output_with_alpha is set.
BoundResult compute_output_bounds(const Network& net,
                                  const SplitAssignment& splits,
                                  const AlphaParams& alpha, const Box& box,
                                  const BoundOptions& opts = {});

struct DomainSpec {
  SplitAssignment splits;
  AlphaParams alpha;
  BoundOptions opts;
};

/// Elementwise identical to compute_output_bounds over the list; domains
/// are independent, so parallel execution merges by index.
std::vector<BoundResult> batch_output_bounds(const Network& net,
                                             const std::vector<DomainSpec>& domains,
                                             const Box& box, int threads = 1);

namespace detail {

/// Shared tape-building context for one bound computation. Exposed for the
/// slope optimizer, which needs gradients of f_lb w.r.t. the alpha params.
struct BoundGraph {
  BoundGraph(const Network& net, const SplitAssignment& splits,
             const AlphaParams& alpha, const Box& box, const BoundOptions& opts,
             bool alpha_as_params);

  /// Computes intermediate bounds layer by layer. Returns false when a
  /// clamp contradiction makes the domain empty.
  bool prepare();
  /// Output backward passes and concretization; requires prepare() == true.
  void finish_output();
  bool run();

  BoundResult result() const;

  /// d f_lb / d alpha, flattened over alpha.support(). Call after run().
  VectorXd alpha_grad();

  const Network& net;
  const SplitAssignment& splits;
  const AlphaParams& alpha_in;
  Box box;
  BoundOptions opts;
  bool alpha_as_params;

  ad::Tape tape;
  std::vector<ad::Var> alpha_vars;  // per hidden layer, n_i x 1
  std::vector<ad::Var> lo_v, up_v;  // bounds per hidden layer
  // relaxation families per hidden layer
  std::vector<ad::Var> a_low, b_low, a_up, b_up;        // alpha-tracked
  std::vector<ad::Var> a_low_h, b_low_h;                // heuristic slopes
  std::vector<bool> relax_built;
  std::vector<VectorXd> lambda;
  uint64_t fingerprint = ad::mask_seed();
  bool empty = false;
  int empty_layer = -1;

  ad::Var f_lb_var, f_ub_var;
  MatrixXd out_A_low, out_A_up;
  double out_b_low = 0.0, out_b_up = 0.0;
  IntermediateBounds ib_values;

  struct Pass {
    ad::Var A;
    ad::Var c;
  };
  /// One backward pass to the input. side=+1 lower, -1 upper.
  Pass backward_to_input(int target_layer, int side, bool heuristic_alpha,
                         bool record_lambda);

 private:
  void build_relaxation(int layer);
  ad::Var concretize_var(ad::Var A, ad::Var c, int side);
};

}  // namespace detail

}  // namespace rv
