#pragma once

#include <string>
#include <vector>

#include "reluverify/boundprop.hpp"
#include "reluverify/simplex.hpp"

namespace rv {

/// Offset applied to the h <= 0 side of a NEG split when it is encoded as
/// an LP row. Sign-conflicting splits whose closures touch in a single
/// point (h = 0) then register as infeasible; the h = 0 face itself always
/// belongs to the POS sibling, which is encoded closed.
inline constexpr double kNegSplitMargin = 1e-6;

enum class Rel { kLe, kGe, kEq };

struct LPRow {
  VectorXd coeffs;
  Rel rel = Rel::kLe;
  double rhs = 0.0;
  std::string name;
};

/// General-form linear program: minimize objective . v over the rows plus
/// per-variable bounds (infinities allowed).
struct LPProblem {
  VectorXd objective;
  std::vector<LPRow> rows;
  VectorXd var_lb;
  VectorXd var_ub;
  std::vector<std::string> var_names;

  int num_vars() const { return static_cast<int>(var_names.size()); }
  int add_var(const std::string& name,
              double lb = -std::numeric_limits<double>::infinity(),
              double ub = std::numeric_limits<double>::infinity());
  void add_row(LPRow row);
  void validate() const;

  /// Largest constraint/bound violation of a candidate point.
  double max_violation(const VectorXd& v) const;

  /// Plain-text dump of the problem; see README for the grammar.
  std::string dump() const;
};

enum class LPStatus { kOptimal, kInfeasible, kNumericalFailure };

struct LPOutcome {
  LPStatus status = LPStatus::kNumericalFailure;
  double value = 0.0;
  VectorXd point;  // primal point in the problem's variables (OPTIMAL only)
  int64_t pivots = 0;
  std::string message;
};

LPOutcome solve_lp(const LPProblem& prob);

/// Triangle-relaxation LP of the sub-domain: box bounds on x, layer
/// equalities, and per-neuron relaxation/sign rows. The objective is the
/// scalar output variable.
LPProblem build_lp(const Network& net, const SplitAssignment& splits,
                   const IntermediateBounds& ibounds, const Box& box);

struct LPBoundOutcome {
  LPOutcome outcome;
  /// Input-space part of the primal point (witness candidate).
  VectorXd input_point;
};

LPBoundOutcome lp_bound(const Network& net, const SplitAssignment& splits,
                        const IntermediateBounds& ibounds, const Box& box);

}  // namespace rv
