#pragma once

#include <cstdint>
#include <string>

#include "reluverify/common.hpp"

namespace rv::simplex {

inline constexpr double kFeasTol = 1e-8;
inline constexpr double kOptTol = 1e-8;
inline constexpr double kPivotTol = 1e-9;
inline constexpr int64_t kMaxPivots = 1000000;

enum class Status { kOptimal, kInfeasible, kNumericalFailure };

/// min c.x subject to A x = b, x >= 0 (b >= 0 not required).
struct StandardLP {
  MatrixXd A;
  VectorXd b;
  VectorXd c;
};

struct Result {
  Status status = Status::kNumericalFailure;
  VectorXd x;
  double value = 0.0;
  int64_t pivots = 0;
  std::string message;
};

/// Two-phase primal tableau simplex with Bland's anti-cycling rule.
Result solve_standard(const StandardLP& lp);

}  // namespace rv::simplex
