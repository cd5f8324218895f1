#include "reluverify/tape.hpp"

namespace rv::ad {

const MatrixXd& Var::val() const { return tape_->node(idx_).value; }
const MatrixXd& Var::grad() const { return tape_->node(idx_).grad; }

Var Tape::push(Op op, int a, int b, MatrixXd value) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(MatrixXd v) { return push(Op::Const, -1, -1, std::move(v)); }
Var Tape::param(MatrixXd v) { return push(Op::Param, -1, -1, std::move(v)); }

namespace {
void check_same_shape(const Var& a, const Var& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvariantError(std::string("tape: shape mismatch in ") + what);
}
}  // namespace

Var Tape::add(Var a, Var b) {
  check_same_shape(a, b, "add");
  return push(Op::Add, a.idx_, b.idx_, a.val() + b.val());
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  return push(Op::Sub, a.idx_, b.idx_, a.val() - b.val());
}

Var Tape::neg(Var a) { return push(Op::Neg, a.idx_, -1, -a.val()); }

Var Tape::matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw InvariantError("tape: matmul shape mismatch");
  return push(Op::MatMul, a.idx_, b.idx_, a.val() * b.val());
}

Var Tape::cwise_mul(Var a, Var b) {
  check_same_shape(a, b, "cwise_mul");
  return push(Op::CwiseMul, a.idx_, b.idx_,
              a.val().cwiseProduct(b.val()));
}

Var Tape::cwise_div(Var a, Var b) {
  check_same_shape(a, b, "cwise_div");
  return push(Op::CwiseDiv, a.idx_, b.idx_, a.val().cwiseQuotient(b.val()));
}

Var Tape::scale_cols(Var a, Var v) {
  if (v.cols() != 1 || v.rows() != a.cols())
    throw InvariantError("tape: scale_cols expects a column vector of length cols(a)");
  return push(Op::ScaleCols, a.idx_, v.idx_,
              a.val() * v.val().col(0).asDiagonal());
}

Var Tape::rowsum(Var a) {
  return push(Op::RowSum, a.idx_, -1, a.val().rowwise().sum());
}

void Tape::backward(Var seed) {
  if (seed.tape_ != this) throw InvariantError("tape: foreign seed");
  if (seed.rows() != 1 || seed.cols() != 1)
    throw InvariantError("tape: backward seed must be scalar");
  for (auto& n : nodes_) n.grad = MatrixXd::Zero(n.value.rows(), n.value.cols());
  nodes_[seed.idx_].grad(0, 0) = 1.0;
  for (int i = seed.idx_; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.isZero(0.0)) continue;
    const MatrixXd& g = n.grad;
    switch (n.op) {
      case Op::Const:
      case Op::Param:
        break;
      case Op::Add:
        nodes_[n.a].grad += g;
        nodes_[n.b].grad += g;
        break;
      case Op::Sub:
        nodes_[n.a].grad += g;
        nodes_[n.b].grad -= g;
        break;
      case Op::Neg:
        nodes_[n.a].grad -= g;
        break;
      case Op::MatMul:
        nodes_[n.a].grad += g * nodes_[n.b].value.transpose();
        nodes_[n.b].grad += nodes_[n.a].value.transpose() * g;
        break;
      case Op::CwiseMul:
        nodes_[n.a].grad += g.cwiseProduct(nodes_[n.b].value);
        nodes_[n.b].grad += g.cwiseProduct(nodes_[n.a].value);
        break;
      case Op::CwiseDiv: {
        const MatrixXd& bv = nodes_[n.b].value;
        nodes_[n.a].grad += g.cwiseQuotient(bv);
        nodes_[n.b].grad -=
            g.cwiseProduct(n.value).cwiseQuotient(bv);
        break;
      }
      case Op::ScaleCols: {
        const MatrixXd& av = nodes_[n.a].value;
        const VectorXd v = nodes_[n.b].value.col(0);
        nodes_[n.a].grad += g * v.asDiagonal();
        nodes_[n.b].grad.col(0) +=
            g.cwiseProduct(av).colwise().sum().transpose();
        break;
      }
      case Op::RowSum:
        nodes_[n.a].grad.colwise() += g.col(0);
        break;
    }
  }
}

uint64_t hash_mask(uint64_t h, const MatrixXd& m) {
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) {
      auto v = static_cast<int64_t>(m(r, c));
      for (int byte = 0; byte < 8; ++byte) {
        h ^= static_cast<uint64_t>((v >> (8 * byte)) & 0xff);
        h *= 1099511628211ull;
      }
    }
  }
  return h;
}

}  // namespace rv::ad
