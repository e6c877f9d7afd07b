// SPDX-License-Identifier: Apache-2.0
#include "tempvae/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace tempvae {

Mat apply_activation(Activation act, Mat x) {
  switch (act) {
    case Activation::kNone: return x;
    case Activation::kRelu: return x.array().max(0.0).matrix();
    case Activation::kExp: return x.array().exp().matrix();
    case Activation::kTanh: return x.array().tanh().matrix();
    case Activation::kSigmoid:
      return (1.0 / (1.0 + (-x.array()).exp())).matrix();
  }
  throw std::invalid_argument("unknown activation");
}

static Var apply_activation(Tape& t, Activation act, Var x) {
  switch (act) {
    case Activation::kNone: return x;
    case Activation::kRelu: return t.relu(x);
    case Activation::kExp: return t.exp(x);
    case Activation::kTanh: return t.tanh(x);
    case Activation::kSigmoid: return t.sigmoid(x);
  }
  throw std::invalid_argument("unknown activation");
}

Mat variance_scaling_init(int fan_in, int fan_out, Rng& rng) {
  if (fan_in < 1 || fan_out < 1)
    throw std::invalid_argument("variance_scaling_init: fan dims must be >= 1");
  const double sd = std::sqrt(2.0 / fan_in);
  return sd * rng.normal_matrix(fan_in, fan_out);
}

Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng,
                 bool training) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("dropout rate must be in [0, 1)");
  if (!training || rate == 0.0) return Mat::Ones(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  Mat mask(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      mask(r, c) = rng.uniform() < rate ? 0.0 : keep;
  return mask;
}

DenseLayer DenseLayer::make(ParamStore& ps, const std::string& prefix, int in,
                            int out, Activation act, Rng& rng,
                            bool trainable) {
  DenseLayer l;
  l.W = &ps.add(prefix + ".W", in, out, trainable);
  l.W->value = variance_scaling_init(in, out, rng);
  l.b = &ps.add(prefix + ".b", 1, out, trainable);
  l.act = act;
  return l;
}

Mat DenseLayer::forward(const Mat& x) const {
  if (x.cols() != W->value.rows())
    throw std::invalid_argument("dense_forward: input width " +
                                std::to_string(x.cols()) + " != " +
                                std::to_string(W->value.rows()));
  Mat pre = x * W->value;
  pre.rowwise() += b->value.row(0);
  return apply_activation(act, std::move(pre));
}

Var DenseLayer::forward(Tape& t, Var x) const {
  Var pre = t.add_row(t.matmul(x, t.param(*W)), t.param(*b));
  return apply_activation(t, act, pre);
}

GruCell GruCell::make(ParamStore& ps, const std::string& prefix, int in,
                      int hidden, Rng& rng, bool trainable) {
  GruCell c;
  auto weight = [&](const std::string& name, int r, int co) {
    Parameter* p = &ps.add(prefix + "." + name, r, co, trainable);
    p->value = variance_scaling_init(r, co, rng);
    return p;
  };
  auto bias = [&](const std::string& name, int co) {
    return &ps.add(prefix + "." + name, 1, co, trainable);
  };
  c.Wxz = weight("Wxz", in, hidden);
  c.Whz = weight("Whz", hidden, hidden);
  c.bz = bias("bz", hidden);
  c.Wxr = weight("Wxr", in, hidden);
  c.Whr = weight("Whr", hidden, hidden);
  c.br = bias("br", hidden);
  c.Wxc = weight("Wxc", in, hidden);
  c.Whc = weight("Whc", hidden, hidden);
  c.bc = bias("bc", hidden);
  return c;
}

static void check_gru_shapes(const GruCell& c, Eigen::Index h_cols,
                             Eigen::Index x_cols) {
  if (x_cols != c.Wxz->value.rows())
    throw std::invalid_argument("gru_step: input width " +
                                std::to_string(x_cols) + " != " +
                                std::to_string(c.Wxz->value.rows()));
  if (h_cols != c.Whz->value.rows())
    throw std::invalid_argument("gru_step: hidden width " +
                                std::to_string(h_cols) + " != " +
                                std::to_string(c.Whz->value.rows()));
}

Mat GruCell::step(const Mat& h_prev, const Mat& x) const {
  check_gru_shapes(*this, h_prev.cols(), x.cols());
  auto gate = [&](const Parameter* Wx, const Parameter* Wh,
                  const Parameter* b, const Mat& h) {
    Mat pre = x * Wx->value;
    pre.noalias() += h * Wh->value;
    pre.rowwise() += b->value.row(0);
    return pre;
  };
  Mat z = apply_activation(Activation::kSigmoid, gate(Wxz, Whz, bz, h_prev));
  Mat r = apply_activation(Activation::kSigmoid, gate(Wxr, Whr, br, h_prev));
  Mat rh = (r.array() * h_prev.array()).matrix();
  Mat c = apply_activation(Activation::kTanh, gate(Wxc, Whc, bc, rh));
  return h_prev.array() + z.array() * (c.array() - h_prev.array());
}

Var GruCell::step(Tape& t, Var h_prev, Var x, Var mask_x, Var mask_h) const {
  check_gru_shapes(*this, t.value(h_prev).cols(), t.value(x).cols());
  Var xm = mask_x.valid() ? t.mul(x, mask_x) : x;
  Var hm = mask_h.valid() ? t.mul(h_prev, mask_h) : h_prev;
  auto gate = [&](Parameter* Wx, Parameter* Wh, Parameter* b, Var h) {
    return t.add_row(t.add(t.matmul(xm, t.param(*Wx)), t.matmul(h, t.param(*Wh))),
                     t.param(*b));
  };
  Var z = t.sigmoid(gate(Wxz, Whz, bz, hm));
  Var r = t.sigmoid(gate(Wxr, Whr, br, hm));
  Var c = t.tanh(gate(Wxc, Whc, bc, t.mul(r, hm)));
  // h' = h + z.(c - h)
  return t.add(h_prev, t.mul(z, t.sub(c, h_prev)));
}

double l2_penalty(const std::vector<const Parameter*>& weights, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("l2_penalty: lambda < 0");
  double s = 0.0;
  for (const Parameter* p : weights) s += p->value.array().square().sum();
  return lambda * s;
}

Var l2_penalty(Tape& t, const std::vector<Parameter*>& weights, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("l2_penalty: lambda < 0");
  Var total;
  for (Parameter* p : weights) {
    Var s = t.sum_all(t.square(t.param(*p)));
    total = total.valid() ? t.add(total, s) : s;
  }
  if (!total.valid()) return t.constant(Mat::Zero(1, 1));
  return t.scale(total, lambda);
}

double Adam::lr_at(long long step) const {
  return cfg_.lr0 * std::pow(cfg_.decay_rate,
                             static_cast<double>(step) / cfg_.decay_steps);
}

void Adam::update(ParamStore& ps) {
  const double lr = current_lr();
  const double t = static_cast<double>(step_ + 1);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t);
  for (auto& p : ps) {
    if (!p->trainable) continue;
    if (!p->grad.allFinite())
      throw std::runtime_error("adam_update: non-finite gradient for parameter " +
                               p->name);
    p->m = cfg_.beta1 * p->m + (1.0 - cfg_.beta1) * p->grad;
    p->v.array() =
        cfg_.beta2 * p->v.array() + (1.0 - cfg_.beta2) * p->grad.array().square();
    p->value.array() -= lr * (p->m.array() / bc1) /
                        ((p->v.array() / bc2).sqrt() + cfg_.eps);
  }
  ++step_;
}

}  // namespace tempvae
