#pragma once

// Single-transition quantities of the kinetic Ising model: effective fields,
// log-probabilities, scores and Fisher information for both score-driven
// specifications. All functions are pure.

#include "sdkim/types.hpp"

namespace sdkim {

using VecRef = Eigen::Ref<const Vector>;

/// log(2 cosh x), stable for any finite x.
double log_2cosh(double x);

/// g_i = sum_j J_ij s_j + h_i + sum_k b_ik x_k.
Vector effective_fields(const VecRef& s, const VecRef& x, const StaticParams& params);

/// DyEKIM fields with each factor's contribution kept separately.
FieldDecomposition ekim_fields(const VecRef& s, const VecRef& x, const StaticParams& params,
                               const EkimFactorState& state);

/// log p(s_next | g, beta) = sum_i [beta s_i g_i - log 2cosh(beta g_i)].
double transition_loglik(const VecRef& s_next, const VecRef& g, double beta);

/// E[s_next | g, beta] = tanh(beta g).
Vector conditional_mean(const VecRef& g, double beta);

/// d loglik / d log(beta).
double score_dynokim(const VecRef& s_next, const VecRef& g, double beta);

/// Fisher information of log(beta); does not depend on s_next.
double fisher_dynokim(const VecRef& g, double beta);

struct ScoreFisher {
  Vector score;
  Vector fisher;
};

/// Per-factor score and (diagonal) Fisher information of the DyEKIM kernel,
/// taken w.r.t. log beta for the beta factors and w.r.t. h0 directly.
/// Factor order: beta_diag, beta_off, beta_h, beta_k..., h0.
ScoreFisher score_fisher_ekim(const VecRef& s_next, const FieldDecomposition& decomp,
                              const EkimFactorState& state);

/// DyEKIM one-step log-likelihood, sum_i [s_i g_i - log 2cosh g_i] with g the total field.
double ekim_loglik(const VecRef& s_next, const FieldDecomposition& decomp);

}  // namespace sdkim
