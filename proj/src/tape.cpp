// SPDX-License-Identifier: Apache-2.0
#include "tempvae/tape.hpp"

#include <stdexcept>
#include <string>

namespace tempvae {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("tape: " + what);
}

}  // namespace

int Tape::check(Var v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("tape: invalid node handle");
  return v.id;
}

Tape::Var Tape::push(Op op, Mat val, Var a, Var b, double c) {
  Node n;
  n.op = op;
  n.a = a.valid() ? a.id : -1;
  n.b = b.valid() ? b.id : -1;
  n.c = c;
  n.val = std::move(val);
  n.needs_grad = (n.a >= 0 && nodes_[n.a].needs_grad) ||
                 (n.b >= 0 && nodes_[n.b].needs_grad);
  if (!n.val.allFinite())
    throw std::runtime_error("tape: non-finite value produced by op " +
                             std::to_string(static_cast<int>(op)));
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Var Tape::constant(Mat v) { return push(Op::kConst, std::move(v), {}, {}); }

Tape::Var Tape::param(Parameter& p) {
  Node n;
  n.op = Op::kParam;
  n.val = p.value;
  n.bound = &p;
  n.needs_grad = p.trainable;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Var Tape::matmul(Var a, Var b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  require(A.cols() == B.rows(), "matmul shape mismatch " +
                                    std::to_string(A.cols()) + " vs " +
                                    std::to_string(B.rows()));
  Mat out(A.rows(), B.cols());
  out.noalias() = A * B;
  return push(Op::kMatMul, std::move(out), a, b);
}

Tape::Var Tape::add_row(Var a, Var b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  require(B.rows() == 1 && A.cols() == B.cols(), "add_row shape mismatch");
  Mat out = A;
  out.rowwise() += B.row(0);
  return push(Op::kAddRow, std::move(out), a, b);
}

#define TEMPVAE_BINOP(name, op_id, expr)                             \
  Tape::Var Tape::name(Var a, Var b) {                               \
    const Mat& A = value(a);                                         \
    const Mat& B = value(b);                                         \
    require(A.rows() == B.rows() && A.cols() == B.cols(),            \
            #name " shape mismatch");                                \
    Mat out = (expr);                                                \
    return push(Op::op_id, std::move(out), a, b);                    \
  }

TEMPVAE_BINOP(add, kAdd, A + B)
TEMPVAE_BINOP(sub, kSub, A - B)
TEMPVAE_BINOP(mul, kMul, (A.array() * B.array()).matrix())
TEMPVAE_BINOP(div, kDiv, (A.array() / B.array()).matrix())
#undef TEMPVAE_BINOP

Tape::Var Tape::scale(Var a, double c) {
  return push(Op::kScale, value(a) * c, a, {}, c);
}

Tape::Var Tape::add_scalar(Var a, double c) {
  return push(Op::kAddScalar, (value(a).array() + c).matrix(), a, {}, c);
}

#define TEMPVAE_UNOP(name, op_id, expr)                   \
  Tape::Var Tape::name(Var a) {                           \
    const auto& A = value(a).array();                     \
    Mat out = (expr).matrix();                            \
    return push(Op::op_id, std::move(out), a);            \
  }

TEMPVAE_UNOP(exp, kExp, A.exp())
TEMPVAE_UNOP(log, kLog, A.log())
TEMPVAE_UNOP(tanh, kTanh, A.tanh())
TEMPVAE_UNOP(sigmoid, kSigmoid, 1.0 / (1.0 + (-A).exp()))
TEMPVAE_UNOP(relu, kRelu, A.max(0.0))
TEMPVAE_UNOP(square, kSquare, A.square())
#undef TEMPVAE_UNOP

Tape::Var Tape::concat_cols(Var a, Var b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  require(A.rows() == B.rows(), "concat_cols row mismatch");
  Mat out(A.rows(), A.cols() + B.cols());
  out.leftCols(A.cols()) = A;
  out.rightCols(B.cols()) = B;
  return push(Op::kConcat, std::move(out), a, b);
}

Tape::Var Tape::sum_cols(Var a) {
  return push(Op::kSumCols, value(a).rowwise().sum(), a);
}

Tape::Var Tape::sum_all(Var a) {
  Mat out(1, 1);
  out(0, 0) = value(a).sum();
  return push(Op::kSumAll, std::move(out), a);
}

const Mat& Tape::grad(Var v) const {
  const Node& n = nodes_[check(v)];
  static const Mat empty;
  return n.grad.size() > 0 ? n.grad : empty;
}

Mat& Tape::grad_buf(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.val.rows(), n.val.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  const int root = check(loss);
  require(nodes_[root].val.size() == 1, "backward root must be scalar");
  if (!nodes_[root].needs_grad) return;
  grad_buf(root)(0, 0) = 1.0;

  for (int i = root; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::kConst:
        break;
      case Op::kParam:
        n.bound->grad += g;
        break;
      case Op::kMatMul: {
        Node& na = nodes_[n.a];
        Node& nb = nodes_[n.b];
        if (na.needs_grad) grad_buf(n.a).noalias() += g * nb.val.transpose();
        if (nb.needs_grad) grad_buf(n.b).noalias() += na.val.transpose() * g;
        break;
      }
      case Op::kAddRow:
        if (nodes_[n.a].needs_grad) grad_buf(n.a) += g;
        if (nodes_[n.b].needs_grad) grad_buf(n.b) += g.colwise().sum();
        break;
      case Op::kAdd:
        if (nodes_[n.a].needs_grad) grad_buf(n.a) += g;
        if (nodes_[n.b].needs_grad) grad_buf(n.b) += g;
        break;
      case Op::kSub:
        if (nodes_[n.a].needs_grad) grad_buf(n.a) += g;
        if (nodes_[n.b].needs_grad) grad_buf(n.b) -= g;
        break;
      case Op::kMul:
        if (nodes_[n.a].needs_grad)
          grad_buf(n.a).array() += g.array() * nodes_[n.b].val.array();
        if (nodes_[n.b].needs_grad)
          grad_buf(n.b).array() += g.array() * nodes_[n.a].val.array();
        break;
      case Op::kDiv:
        if (nodes_[n.a].needs_grad)
          grad_buf(n.a).array() += g.array() / nodes_[n.b].val.array();
        if (nodes_[n.b].needs_grad)
          grad_buf(n.b).array() -=
              g.array() * n.val.array() / nodes_[n.b].val.array();
        break;
      case Op::kScale:
        if (nodes_[n.a].needs_grad) grad_buf(n.a) += n.c * g;
        break;
      case Op::kAddScalar:
        if (nodes_[n.a].needs_grad) grad_buf(n.a) += g;
        break;
      case Op::kExp:
        if (nodes_[n.a].needs_grad)
          grad_buf(n.a).array() += g.array() * n.val.array();
        break;
      case Op::kLog:
        if (nodes_[n.a].needs_grad)
          grad_buf(n.a).array() += g.array() / nodes_[n.a].val.array();
        break;
      case Op::kTanh:
        if (nodes_[n.a].needs_grad)
          grad_buf(n.a).array() += g.array() * (1.0 - n.val.array().square());
        break;
      case Op::kSigmoid:
        if (nodes_[n.a].needs_grad)
          grad_buf(n.a).array() +=
              g.array() * n.val.array() * (1.0 - n.val.array());
        break;
      case Op::kRelu:
        if (nodes_[n.a].needs_grad)
          grad_buf(n.a).array() +=
              g.array() * (nodes_[n.a].val.array() > 0.0).cast<double>();
        break;
      case Op::kSquare:
        if (nodes_[n.a].needs_grad)
          grad_buf(n.a).array() += 2.0 * g.array() * nodes_[n.a].val.array();
        break;
      case Op::kConcat: {
        const auto ca = nodes_[n.a].val.cols();
        const auto cb = nodes_[n.b].val.cols();
        if (nodes_[n.a].needs_grad) grad_buf(n.a) += g.leftCols(ca);
        if (nodes_[n.b].needs_grad) grad_buf(n.b) += g.rightCols(cb);
        break;
      }
      case Op::kSumCols:
        if (nodes_[n.a].needs_grad)
          grad_buf(n.a).colwise() += g.col(0);
        break;
      case Op::kSumAll:
        if (nodes_[n.a].needs_grad) grad_buf(n.a).array() += g(0, 0);
        break;
    }
    // free intermediate gradient memory early; keep leaves for inspection
    if (n.op != Op::kConst && n.op != Op::kParam && i != root) n.grad.resize(0, 0);
  }
}

}  // namespace tempvae
