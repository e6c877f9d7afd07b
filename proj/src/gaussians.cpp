// SPDX-License-Identifier: Apache-2.0
#include "tempvae/gaussians.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tempvae {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

void check_dims(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

Vec diag_sample(const GaussianDiag& d, Rng& rng) {
  check_dims(d.mean.size(), d.std.size(), "diag_sample");
  Vec eps(d.mean.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = rng.normal();
  return d.mean.array() + d.std.array() * eps.array();
}

double diag_logpdf(const GaussianDiag& d, const Vec& x) {
  check_dims(d.mean.size(), d.std.size(), "diag_logpdf");
  check_dims(d.mean.size(), x.size(), "diag_logpdf");
  if ((d.std.array() <= 0.0).any())
    throw std::invalid_argument("diag_logpdf: std must be positive");
  const auto z = (x - d.mean).array() / d.std.array();
  return -0.5 * (d.mean.size() * kLog2Pi + z.square().sum()) -
         d.std.array().log().sum();
}

double kl_diag_diag(const GaussianDiag& q, const GaussianDiag& p) {
  check_dims(q.mean.size(), p.mean.size(), "kl_diag_diag");
  check_dims(q.std.size(), p.std.size(), "kl_diag_diag");
  check_dims(q.mean.size(), q.std.size(), "kl_diag_diag");
  const auto vr = (q.std.array() / p.std.array()).square();
  const auto ms = ((p.mean - q.mean).array() / p.std.array()).square();
  return 0.5 * (vr + ms - 1.0).sum() +
         (p.std.array().log() - q.std.array().log()).sum();
}

Vec rank1_sample(const GaussianRank1& d, Rng& rng) {
  check_dims(d.mean.size(), d.std.size(), "rank1_sample");
  check_dims(d.mean.size(), d.perturb.size(), "rank1_sample");
  Vec eps(d.mean.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = rng.normal();
  const double eps2 = rng.normal();
  return d.mean.array() + d.std.array() * eps.array() +
         d.perturb.array() * eps2;
}

double rank1_logpdf(const GaussianRank1& d, const Vec& x) {
  check_dims(d.mean.size(), d.std.size(), "rank1_logpdf");
  check_dims(d.mean.size(), d.perturb.size(), "rank1_logpdf");
  check_dims(d.mean.size(), x.size(), "rank1_logpdf");
  if ((d.std.array() <= 0.0).any())
    throw std::invalid_argument("rank1_logpdf: std must be positive");
  const auto y = (x - d.mean).array() / d.std.array();   // D^{-1/2} residual
  const auto w = d.perturb.array() / d.std.array();      // D^{-1/2} u
  const double s = 1.0 + w.square().sum();               // 1 + u^T D^-1 u
  const double cross = (y * w).sum();
  const double quad = y.square().sum() - cross * cross / s;
  const double logdet = 2.0 * d.std.array().log().sum() + std::log(s);
  return -0.5 * (d.mean.size() * kLog2Pi + logdet + quad);
}

Var diag_sample(Tape& t, Var mean, Var std, Var eps) {
  return t.add(mean, t.mul(std, eps));
}

Var diag_logpdf(Tape& t, Var mean, Var std, Var log_std, Var x) {
  const auto k = static_cast<double>(t.value(mean).cols());
  Var z = t.div(t.sub(x, mean), std);
  Var quad = t.sum_cols(t.square(z));
  Var logs = t.sum_cols(log_std);
  return t.add_scalar(
      t.sub(t.scale(quad, -0.5), logs), -0.5 * k * kLog2Pi);
}

Var kl_diag_diag(Tape& t, Var mean_q, Var std_q, Var log_std_q, Var mean_p,
                 Var std_p, Var log_std_p) {
  Var ratio = t.div(std_q, std_p);
  Var vr = t.square(ratio);
  Var ms = t.square(t.div(t.sub(mean_p, mean_q), std_p));
  Var per_dim = t.add(t.scale(t.add_scalar(t.add(vr, ms), -1.0), 0.5),
                      t.sub(log_std_p, log_std_q));
  return t.sum_cols(per_dim);
}

Var rank1_logpdf(Tape& t, Var mean, Var std, Var log_std, Var perturb, Var x) {
  const auto k = static_cast<double>(t.value(mean).cols());
  Var y = t.div(t.sub(x, mean), std);
  Var w = t.div(perturb, std);
  Var s = t.add_scalar(t.sum_cols(t.square(w)), 1.0);        // Bx1
  Var cross = t.sum_cols(t.mul(y, w));                       // Bx1
  Var quad = t.sub(t.sum_cols(t.square(y)), t.div(t.square(cross), s));
  Var logdet = t.add(t.scale(t.sum_cols(log_std), 2.0), t.log(s));
  return t.scale(t.add_scalar(t.add(logdet, quad), k * kLog2Pi), -0.5);
}

}  // namespace tempvae
