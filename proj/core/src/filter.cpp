#include "sdkim/filter.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sdkim {

double scaled_score(double score, double fisher) {
  if (!(fisher >= kFisherFloor)) return 0.0;
  return score / std::sqrt(fisher);
}

FactorPath filter(const FieldCache& cache, const GasCoefficients& gas, const Vector& f_init) {
  gas.validate();
  const Index m_count = cache.factors();
  if (gas.factors() != m_count || f_init.size() != m_count) {
    throw std::invalid_argument("filter: coefficient size does not match the model's factor count");
  }
  const Index steps = cache.steps();
  FactorPath path;
  path.kind = cache.kind();
  path.covariates = cache.covariates();
  path.values.resize(steps, m_count);
  path.score.resize(steps, m_count);
  path.fisher.resize(steps, m_count);
  path.loglik.resize(steps);

  StepStats stats = cache.make_stats();
  Vector f = f_init;
  for (Index t = 0; t < steps; ++t) {
    cache.evaluate(t, f, stats);
    for (Index m = 0; m < m_count; ++m) {
      path.values(t, m) = is_log_linked(path.kind, path.covariates, m) ? std::exp(f(m)) : f(m);
    }
    path.score.row(t) = stats.score.transpose();
    path.fisher.row(t) = stats.fisher.transpose();
    path.loglik(t) = stats.loglik;
    for (Index m = 0; m < m_count; ++m) {
      f(m) = gas.w(m) + gas.B(m) * f(m) + gas.A(m) * scaled_score(stats.score(m), stats.fisher(m));
    }
    if (!f.allFinite()) {
      std::ostringstream os;
      os << "filter: non-finite factor update at t = " << t;
      throw NumericalError(os.str());
    }
  }
  return path;
}

FactorPath filter(const FieldCache& cache, const GasCoefficients& gas) {
  gas.validate();
  return filter(cache, gas, gas.unconditional_mean());
}

FactorPath filter(ModelKind kind, const SpinPath& spins, const CovariatePath& covariates,
                  const StaticParams& params, const GasCoefficients& gas,
                  const std::optional<Vector>& f_init) {
  const FieldCache cache(kind, spins, covariates, params);
  return f_init ? filter(cache, gas, *f_init) : filter(cache, gas);
}

Forecast forecast(const VecRef& s_t, const VecRef& x_t, const StaticParams& params,
                  double beta_prev, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("forecast: alpha must lie in (0, 1)");
  if (!(beta_prev > 0.0)) throw std::invalid_argument("forecast: beta must be positive");
  const Vector g = effective_fields(s_t, x_t, params);
  Forecast out;
  // e^{bg} / (2 cosh bg) = (1 + tanh(bg)) / 2
  out.probability = 0.5 * (1.0 + (beta_prev * g.array()).tanh());
  out.prediction = (out.probability.array() - alpha).sign().matrix();
  for (Index i = 0; i < out.prediction.size(); ++i) {
    if (out.prediction(i) == 0.0) out.prediction(i) = 1.0;  // p == alpha counts as positive
  }
  return out;
}

Matrix forecast_probabilities(const FieldCache& cache, const FactorPath& path, bool peek) {
  if (path.steps() != cache.steps()) throw std::invalid_argument("forecast_probabilities: path length");
  const Index steps = cache.steps();
  Matrix p(steps - 1, cache.spins());
  const Matrix f = path.link_values();
  for (Index t = 1; t < steps; ++t) {
    const Vector f_used = f.row(peek ? t : t - 1).transpose();
    const Vector g = cache.total_fields(t, f_used);
    p.row(t - 1) = (0.5 * (1.0 + g.array().tanh())).matrix().transpose();
  }
  return p;
}

}  // namespace sdkim
