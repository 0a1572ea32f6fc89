#include "sdkim/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace sdkim {

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("beta must be positive and finite");
  }
}

void check_same(Index a, Index b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string("dimension mismatch: ") + what);
}

void check_inputs(const VecRef& s, const VecRef& x, const StaticParams& params) {
  check_same(s.size(), params.spins(), "spin vector vs J");
  check_same(x.size(), params.covariates(), "covariate vector vs b");
  check_same(params.h.size(), params.spins(), "h vs J");
}

}  // namespace

double log_2cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

Vector effective_fields(const VecRef& s, const VecRef& x, const StaticParams& params) {
  check_inputs(s, x, params);
  Vector g = params.J * s + params.h;
  if (x.size() > 0) g.noalias() += params.b * x;
  return g;
}

FieldDecomposition ekim_fields(const VecRef& s, const VecRef& x, const StaticParams& params,
                               const EkimFactorState& state) {
  check_inputs(s, x, params);
  check_same(state.beta_k.size(), params.covariates(), "beta_k vs b");
  FieldDecomposition d;
  const Vector diag_raw = params.J.diagonal().cwiseProduct(s);
  d.diag = state.beta_diag * diag_raw;
  d.off = state.beta_off * (params.J * s - diag_raw);
  d.bias = state.beta_h * (params.h.array() + state.h0).matrix();
  d.cov_parts.resize(s.size(), x.size());
  for (Index k = 0; k < x.size(); ++k) d.cov_parts.col(k) = state.beta_k(k) * x(k) * params.b.col(k);
  d.cov = d.cov_parts.rowwise().sum();
  d.total = d.diag + d.off + d.bias + d.cov;
  return d;
}

double transition_loglik(const VecRef& s_next, const VecRef& g, double beta) {
  check_beta(beta);
  check_same(s_next.size(), g.size(), "s_next vs g");
  double ll = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    const double u = beta * g(i);
    ll += s_next(i) * u - log_2cosh(u);
  }
  return ll;
}

Vector conditional_mean(const VecRef& g, double beta) {
  check_beta(beta);
  return (beta * g.array()).tanh().matrix();
}

double score_dynokim(const VecRef& s_next, const VecRef& g, double beta) {
  check_beta(beta);
  check_same(s_next.size(), g.size(), "s_next vs g");
  double score = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    score += (s_next(i) - std::tanh(beta * g(i))) * g(i);
  }
  return beta * score;
}

double fisher_dynokim(const VecRef& g, double beta) {
  check_beta(beta);
  double info = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    const double t = std::tanh(beta * g(i));
    info += (1.0 - t * t) * g(i) * g(i);
  }
  return beta * beta * info;
}

ScoreFisher score_fisher_ekim(const VecRef& s_next, const FieldDecomposition& decomp,
                              const EkimFactorState& state) {
  const Index n = decomp.total.size();
  check_same(s_next.size(), n, "s_next vs fields");
  const Index k_count = state.beta_k.size();
  const Index m_count = 4 + k_count;
  ScoreFisher out{Vector::Zero(m_count), Vector::Zero(m_count)};
  check_same(decomp.cov_parts.cols(), k_count, "cov_parts vs beta_k");
  for (Index i = 0; i < n; ++i) {
    const double tau = std::tanh(decomp.total(i));
    const double resid = s_next(i) - tau;
    const double curv = 1.0 - tau * tau;
    const double c[3] = {decomp.diag(i), decomp.off(i), decomp.bias(i)};
    for (int m = 0; m < 3; ++m) {
      out.score(m) += resid * c[m];
      out.fisher(m) += curv * c[m] * c[m];
    }
    for (Index k = 0; k < k_count; ++k) {
      const double ck = decomp.cov_parts(i, k);
      out.score(3 + k) += resid * ck;
      out.fisher(3 + k) += curv * ck * ck;
    }
    out.score(m_count - 1) += state.beta_h * resid;
    out.fisher(m_count - 1) += state.beta_h * state.beta_h * curv;
  }
  return out;
}

double ekim_loglik(const VecRef& s_next, const FieldDecomposition& decomp) {
  check_same(s_next.size(), decomp.total.size(), "s_next vs fields");
  double ll = 0.0;
  for (Index i = 0; i < s_next.size(); ++i) {
    ll += s_next(i) * decomp.total(i) - log_2cosh(decomp.total(i));
  }
  return ll;
}

}  // namespace sdkim
