// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "tempvae/param.hpp"

namespace tempvae {

// Reverse-mode tape over matrix-valued nodes. Every value is a B x N matrix
// whose rows are batch elements, so a whole mini-batch flows through one node
// per operation. Nodes are appended in topological order; backward() walks
// them in reverse. Gradients of nodes that cannot reach a trainable parameter
// are skipped.
class Tape {
public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  void reset() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

  Var constant(Mat v);
  Var param(Parameter& p);

  Var matmul(Var a, Var b);         // (BxM)*(MxN)
  Var add_row(Var a, Var b);        // (BxN) + (1xN), broadcast over rows
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);            // elementwise
  Var div(Var a, Var b);            // elementwise
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  Var exp(Var a);
  Var log(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var square(Var a);
  Var concat_cols(Var a, Var b);
  Var sum_cols(Var a);              // (BxN) -> (Bx1)
  Var sum_all(Var a);               // (BxN) -> (1x1)

  const Mat& value(Var v) const { return nodes_[check(v)].val; }
  // valid after backward(); zero matrix if the node needed no gradient
  const Mat& grad(Var v) const;

  // seeds d(loss)=1 and accumulates into every reachable Parameter::grad.
  // loss must be 1x1.
  void backward(Var loss);

private:
  enum class Op : std::uint8_t {
    kConst, kParam, kMatMul, kAddRow, kAdd, kSub, kMul, kDiv,
    kScale, kAddScalar, kExp, kLog, kTanh, kSigmoid, kRelu, kSquare,
    kConcat, kSumCols, kSumAll,
  };

  struct Node {
    Op op;
    int a = -1, b = -1;
    double c = 0.0;
    Mat val;
    Mat grad;
    Parameter* bound = nullptr;
    bool needs_grad = false;
  };

  int check(Var v) const;
  Var push(Op op, Mat val, Var a, Var b = {}, double c = 0.0);
  Mat& grad_buf(int id);

  std::vector<Node> nodes_;
};

using Var = Tape::Var;

}  // namespace tempvae
