#pragma once

#include <cstdint>
#include <vector>

#include "reluverify/common.hpp"

namespace rv::ad {

// Minimal reverse-mode differentiation over dense matrices. Values are
// computed eagerly when a node is created, so callers can inspect them to
// derive selection masks; masks enter the graph as constants and the
// backward pass differentiates only the smooth arithmetic between them.

class Tape;

/// Handle to a node on a Tape. Cheap to copy; invalid when default-built.
class Var {
 public:
  Var() = default;
  bool valid() const { return tape_ != nullptr; }
  const MatrixXd& val() const;
  const MatrixXd& grad() const;
  int rows() const { return static_cast<int>(val().rows()); }
  int cols() const { return static_cast<int>(val().cols()); }

 private:
  friend class Tape;
  Var(Tape* t, int i) : tape_(t), idx_(i) {}
  Tape* tape_ = nullptr;
  int idx_ = -1;
};

class Tape {
 public:
  Var constant(MatrixXd v);
  Var param(MatrixXd v);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var neg(Var a);
  /// Matrix product a * b (also matrix-vector when b has one column).
  Var matmul(Var a, Var b);
  Var cwise_mul(Var a, Var b);
  /// Elementwise division; caller guarantees b is nonzero everywhere.
  Var cwise_div(Var a, Var b);
  /// out(i,j) = a(i,j) * v(j); v is a column vector of length cols(a).
  Var scale_cols(Var a, Var v);
  /// Column vector of row sums of a.
  Var rowsum(Var a);

  /// Accumulates d(seed)/d(node) for every node; seed must be 1x1.
  void backward(Var seed);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  friend class Var;

  enum class Op { Const, Param, Add, Sub, Neg, MatMul, CwiseMul, CwiseDiv,
                  ScaleCols, RowSum };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    MatrixXd value;
    MatrixXd grad;
  };

  Var push(Op op, int a, int b, MatrixXd value);
  const Node& node(int i) const { return nodes_[i]; }

  std::vector<Node> nodes_;
};

/// FNV-1a hash of a mask/selection matrix, used to fingerprint the active
/// piecewise-linear region of a bound computation.
uint64_t hash_mask(uint64_t h, const MatrixXd& m);

inline uint64_t mask_seed() { return 1469598103934665603ull; }

}  // namespace rv::ad
