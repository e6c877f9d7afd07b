// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tempvae/rng.hpp"
#include "tempvae/tape.hpp"

namespace tempvae {

using Vec = Eigen::VectorXd;

// Diagonal Gaussian, parameterized by per-dimension standard deviations.
// std > 0 except for deliberately degenerate (deterministic) instances.
struct GaussianDiag {
  Vec mean;
  Vec std;
};

// mean + std.eps (reparameterized)
Vec diag_sample(const GaussianDiag& d, Rng& rng);
double diag_logpdf(const GaussianDiag& d, const Vec& x);
// KL(q || p) in closed form, per-dimension sum
double kl_diag_diag(const GaussianDiag& q, const GaussianDiag& p);

// Gaussian with covariance diag(std^2) + perturb perturb^T. The rank-1 term
// admits exact two-noise sampling and a closed-form density via the matrix
// determinant lemma and Sherman-Morrison.
struct GaussianRank1 {
  Vec mean;
  Vec std;
  Vec perturb;
};

// mean + std.eps1 + perturb * eps2, eps1 vector and eps2 scalar standard
// normal; covariance is exactly diag(std^2) + perturb perturb^T
Vec rank1_sample(const GaussianRank1& d, Rng& rng);
double rank1_logpdf(const GaussianRank1& d, const Vec& x);

// --- batched tape versions used inside the ELBO -----------------------------
// All matrices carry one batch row per sample. log_std is the pre-activation
// of std = exp(.), passed through so log terms reuse it exactly.

Var diag_sample(Tape& t, Var mean, Var std, Var eps);
Var diag_logpdf(Tape& t, Var mean, Var std, Var log_std, Var x);   // -> Bx1
Var kl_diag_diag(Tape& t, Var mean_q, Var std_q, Var log_std_q,
                 Var mean_p, Var std_p, Var log_std_p);            // -> Bx1
Var rank1_logpdf(Tape& t, Var mean, Var std, Var log_std, Var perturb,
                 Var x);                                           // -> Bx1

}  // namespace tempvae
