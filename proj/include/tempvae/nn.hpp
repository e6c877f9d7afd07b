// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tempvae/rng.hpp"
#include "tempvae/tape.hpp"

namespace tempvae {

enum class Activation { kNone, kRelu, kExp, kTanh, kSigmoid };

Mat apply_activation(Activation act, Mat x);

// He scheme: entries ~ N(0, 2/fan_in)
Mat variance_scaling_init(int fan_in, int fan_out, Rng& rng);

// Inverted dropout: entries are 0 with probability rate, else 1/(1-rate).
// All ones outside training mode.
Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng,
                 bool training);

// Fully connected layer, parameters owned by a ParamStore.
struct DenseLayer {
  Parameter* W = nullptr;  // in x out
  Parameter* b = nullptr;  // 1 x out
  Activation act = Activation::kNone;

  static DenseLayer make(ParamStore& ps, const std::string& prefix, int in,
                         int out, Activation act, Rng& rng,
                         bool trainable = true);
  int in_dim() const { return static_cast<int>(W->value.rows()); }
  int out_dim() const { return static_cast<int>(W->value.cols()); }

  // x carries one batch row per sample
  Mat forward(const Mat& x) const;
  Var forward(Tape& t, Var x) const;
};

// Gated recurrent unit, gate convention
//   z = sigmoid(x Wxz + h Whz + bz)
//   r = sigmoid(x Wxr + h Whr + br)
//   c = tanh(x Wxc + (r.h) Whc + bc)
//   h' = (1 - z).h + z.c
struct GruCell {
  Parameter *Wxz = nullptr, *Whz = nullptr, *bz = nullptr;
  Parameter *Wxr = nullptr, *Whr = nullptr, *br = nullptr;
  Parameter *Wxc = nullptr, *Whc = nullptr, *bc = nullptr;

  static GruCell make(ParamStore& ps, const std::string& prefix, int in,
                      int hidden, Rng& rng, bool trainable = true);
  int in_dim() const { return static_cast<int>(Wxz->value.rows()); }
  int hidden_dim() const { return static_cast<int>(Wxz->value.cols()); }

  Mat step(const Mat& h_prev, const Mat& x) const;
  // masks (inverted-dropout) are applied to the gate inputs only; the state
  // mix uses the unmasked h_prev. Pass invalid Vars to skip masking.
  Var step(Tape& t, Var h_prev, Var x, Var mask_x = {}, Var mask_h = {}) const;
};

// lambda * sum of squared entries over the given weight set
double l2_penalty(const std::vector<const Parameter*>& weights, double lambda);
Var l2_penalty(Tape& t, const std::vector<Parameter*>& weights, double lambda);

struct AdamConfig {
  double lr0 = 1e-3;
  double decay_rate = 0.96;
  double decay_steps = 500;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction and a continuously decayed learning rate
// lr(t) = lr0 * decay_rate^(t / decay_steps).
class Adam {
public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  double lr_at(long long step) const;
  double current_lr() const { return lr_at(step_); }
  long long step() const { return step_; }
  void set_step(long long s) { step_ = s; }
  const AdamConfig& config() const { return cfg_; }

  // one update over all trainable parameters using their .grad fields;
  // throws on non-finite gradients, naming the offending parameter
  void update(ParamStore& ps);

private:
  AdamConfig cfg_;
  long long step_ = 0;
};

}  // namespace tempvae
