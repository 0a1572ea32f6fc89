#pragma once

#include "sdkim/kernel.hpp"
#include "sdkim/types.hpp"

#include <vector>

namespace sdkim {

/// Per-transition statistics for a factor vector f (link space).
struct StepStats {
  double loglik = 0.0;
  Vector score;    ///< d loglik / d f
  Vector fisher;   ///< diagonal Fisher information
  Matrix dscore;   ///< d score_m / d f_n (observed Hessian of the step)
  Matrix dfisher;  ///< d fisher_m / d f_n
  Matrix info;     ///< full expected information, sum_i (1 - tanh^2) c c^T
  Vector c;        ///< scratch: d g_i / d f for the current spin
  Vector scale;    ///< scratch: exp(f) for log-linked factors
};

/// Field components of a dataset, computed once for given static parameters.
///
/// The score-driven factors only rescale precomputed components, so the
/// recursion can be rerun for any coefficients at O(N M) per step instead of
/// O(N^2). Thread-safe for concurrent evaluate() calls with distinct StepStats.
class FieldCache {
 public:
  FieldCache(ModelKind kind, const SpinPath& spins, const CovariatePath& covariates,
             const StaticParams& params);

  ModelKind kind() const { return kind_; }
  Index steps() const { return next_.rows(); }
  Index spins() const { return next_.cols(); }
  Index covariates() const { return covariates_; }
  Index factors() const { return factor_count(kind_, covariates_); }

  StepStats make_stats() const;

  /// Fills out.loglik/score/fisher for transition t; with `derivatives` also
  /// dscore, dfisher and info.
  void evaluate(Index t, const VecRef& f, StepStats& out, bool derivatives = false) const;

  /// Total fields g_i for transition t at factor vector f.
  Vector total_fields(Index t, const VecRef& f) const;

  /// Fields at unit factors (beta = 1, h0 = 0).
  Vector base_fields(Index t) const;

  /// s(t+1) for transition t.
  auto next(Index t) const { return next_.row(t); }

 private:
  ModelKind kind_;
  Index covariates_;
  RowMatrix next_;
  RowMatrix raw_;   // DyNoKIM: whole field; DyEKIM: off-diagonal coupling part
  RowMatrix diag_;  // DyEKIM: J_ii s_i(t)
  Vector h_;
  std::vector<RowMatrix> cov_;  // DyEKIM: b_ik x_k(t), one matrix per k
};

}  // namespace sdkim
