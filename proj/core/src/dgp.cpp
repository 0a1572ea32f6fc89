#include "sdkim/dgp.hpp"

#include "sdkim/filter.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sdkim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_covariates(const CovariatePath* covariates, Index rows_needed, const StaticParams& params) {
  const Index k = covariates ? covariates->count() : 0;
  if (k != params.covariates()) throw std::invalid_argument("simulate: covariate count does not match b");
  if (covariates && covariates->length() < rows_needed) {
    throw std::invalid_argument("simulate: covariate path shorter than the simulation");
  }
}

Vector covariate_row(const CovariatePath* covariates, Index t) {
  return covariates ? covariates->at(t) : Vector(0);
}

Vector initial_state(const std::optional<Vector>& s_init, Index n, Rng& rng) {
  if (!s_init) return random_spins(n, rng);
  if (s_init->size() != n) throw std::invalid_argument("simulate: initial state has wrong size");
  return *s_init;
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ (index + 1) * 0xD1B54A32D192ED03ULL);
}

Rng replication_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(replication_seed(master, index));
}

std::string to_string(BetaPathKind kind) {
  switch (kind) {
    case BetaPathKind::constant: return "constant";
    case BetaPathKind::sinusoid: return "sinusoid";
    case BetaPathKind::double_step: return "double_step";
    case BetaPathKind::ar1: return "ar1";
    case BetaPathKind::exp_sinusoid: return "exp_sinusoid";
    case BetaPathKind::score_driven: return "score_driven";
  }
  return "unknown";
}

BetaPathKind beta_path_kind_from_string(const std::string& name) {
  for (auto k : {BetaPathKind::constant, BetaPathKind::sinusoid, BetaPathKind::double_step,
                 BetaPathKind::ar1, BetaPathKind::exp_sinusoid, BetaPathKind::score_driven}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown beta path kind '" + name + "'");
}

void BetaPathSpec::validate() const {
  if (kind == BetaPathKind::double_step) {
    if (step_levels.size() != step_breaks.size() + 1) {
      throw std::invalid_argument("double_step: need exactly one more level than break points");
    }
    for (std::size_t j = 0; j < step_breaks.size(); ++j) {
      if (!(step_breaks[j] > 0.0 && step_breaks[j] < 1.0) || (j > 0 && step_breaks[j] <= step_breaks[j - 1])) {
        throw std::invalid_argument("double_step: break points must be increasing fractions in (0, 1)");
      }
    }
  }
  if (kind == BetaPathKind::ar1 && !(std::abs(ar_a1) < 1.0 && ar_sigma >= 0.0)) {
    throw std::invalid_argument("ar1: need |a1| < 1 and sigma >= 0");
  }
  if (kind == BetaPathKind::score_driven) {
    throw std::invalid_argument("score_driven beta paths depend on the observations; use simulate_score_driven");
  }
}

GeneratedPath make_beta_path(const BetaPathSpec& spec, Index length, Rng& rng) {
  spec.validate();
  if (length < 1) throw std::invalid_argument("make_beta_path: length must be positive");
  GeneratedPath out;
  out.values.resize(length);
  const double omega = spec.cycles > 0.0
                           ? spec.cycles * 2.0 * std::numbers::pi / static_cast<double>(length)
                           : spec.omega;
  switch (spec.kind) {
    case BetaPathKind::constant:
      out.values.setConstant(spec.level);
      break;
    case BetaPathKind::sinusoid:
      for (Index t = 0; t < length; ++t) out.values(t) = 1.0 + spec.amplitude * std::sin(omega * t);
      break;
    case BetaPathKind::exp_sinusoid:
      for (Index t = 0; t < length; ++t) out.values(t) = std::exp(std::sin(omega * t));
      break;
    case BetaPathKind::double_step: {
      std::size_t level = 0;
      for (Index t = 0; t < length; ++t) {
        while (level < spec.step_breaks.size() &&
               static_cast<double>(t) >= spec.step_breaks[level] * static_cast<double>(length)) {
          ++level;
        }
        out.values(t) = spec.step_levels[level];
      }
      break;
    }
    case BetaPathKind::ar1: {
      std::normal_distribution<double> noise(0.0, spec.ar_sigma);
      double beta = spec.ar_a0 / (1.0 - spec.ar_a1);
      for (Index t = 0; t < length; ++t) {
        if (t > 0) beta = spec.ar_a0 + spec.ar_a1 * beta + noise(rng);
        // the floor only touches the emitted value; the latent AR state keeps evolving
        if (beta < kArFloor) {
          out.values(t) = kArFloor;
          ++out.floored;
        } else {
          out.values(t) = beta;
        }
      }
      break;
    }
    case BetaPathKind::score_driven:
      break;  // rejected by validate()
  }
  if (!((out.values.array() > 0.0).all())) {
    std::ostringstream os;
    os << to_string(spec.kind) << " beta path has non-positive values (min " << out.values.minCoeff() << ")";
    throw std::invalid_argument(os.str());
  }
  out.raw_mean = out.values.mean();
  if (spec.normalize) out.values /= out.raw_mean;
  return out;
}

void ParamHyperSpec::validate() const {
  if (spins < 1) throw std::invalid_argument("ParamHyperSpec: spins must be positive");
  if (J1 < 0.0 || h1 < 0.0) throw std::invalid_argument("ParamHyperSpec: J1 and h1 must be nonnegative");
  const double n = static_cast<double>(spins);
  if (J1 * J1 / n < J0 * J0 / (n * n)) {
    throw std::invalid_argument("ParamHyperSpec: J1^2/N must be at least J0^2/N^2");
  }
}

StaticParams sample_static_params(const ParamHyperSpec& spec, Rng& rng, Index covariates) {
  spec.validate();
  const Index n = spec.spins;
  const double nn = static_cast<double>(n);
  const double j_sd = std::sqrt(spec.J1 * spec.J1 / nn - spec.J0 * spec.J0 / (nn * nn));
  std::normal_distribution<double> std_normal(0.0, 1.0);
  StaticParams p = StaticParams::zeros(n, covariates);
  // column-major fill order keeps the draw sequence fixed for a given seed
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) p.J(i, j) = spec.J0 / nn + j_sd * std_normal(rng);
  }
  for (Index i = 0; i < n; ++i) {
    p.h(i) = spec.h1 > 0.0 ? spec.h0 + spec.h1 * std_normal(rng) : spec.h0;
  }
  return p;
}

Vector sample_step(const VecRef& g, double beta, Rng& rng) {
  if (!(beta > 0.0)) throw std::invalid_argument("sample_step: beta must be positive");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector s(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    const double p_up = 0.5 * (1.0 + std::tanh(beta * g(i)));
    s(i) = unif(rng) < p_up ? 1.0 : -1.0;
  }
  return s;
}

Vector random_spins(Index n, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  Vector s(n);
  for (Index i = 0; i < n; ++i) s(i) = coin(rng) ? 1.0 : -1.0;
  return s;
}

SpinPath simulate_path(const StaticParams& params, const Vector& beta_path, Rng& rng,
                       const std::optional<Vector>& s_init, const CovariatePath* covariates) {
  params.validate();
  const Index steps = beta_path.size();
  if (steps < 1) throw std::invalid_argument("simulate_path: need at least one transition");
  if (!((beta_path.array() > 0.0).all())) throw std::invalid_argument("simulate_path: beta path must be positive");
  check_covariates(covariates, steps, params);
  const Index n = params.spins();
  Matrix out(steps + 1, n);
  out.row(0) = initial_state(s_init, n, rng).transpose();
  for (Index t = 0; t < steps; ++t) {
    const Vector g = effective_fields(out.row(t).transpose(), covariate_row(covariates, t), params);
    out.row(t + 1) = sample_step(g, beta_path(t), rng).transpose();
  }
  return SpinPath(std::move(out));
}

SpinPath simulate_path(const StaticParams& params, const std::vector<EkimFactorState>& factors,
                       Rng& rng, const std::optional<Vector>& s_init, const CovariatePath* covariates) {
  params.validate();
  const Index steps = static_cast<Index>(factors.size());
  if (steps < 1) throw std::invalid_argument("simulate_path: need at least one transition");
  check_covariates(covariates, steps, params);
  const Index n = params.spins();
  Matrix out(steps + 1, n);
  out.row(0) = initial_state(s_init, n, rng).transpose();
  for (Index t = 0; t < steps; ++t) {
    factors[static_cast<std::size_t>(t)].validate();
    const auto d = ekim_fields(out.row(t).transpose(), covariate_row(covariates, t), params,
                               factors[static_cast<std::size_t>(t)]);
    out.row(t + 1) = sample_step(d.total, 1.0, rng).transpose();
  }
  return SpinPath(std::move(out));
}

std::pair<SpinPath, FactorPath> simulate_score_driven(ModelKind kind, const StaticParams& params,
                                                      const GasCoefficients& gas, Index length,
                                                      Rng& rng, const CovariatePath* covariates) {
  params.validate();
  gas.validate();
  if (length < 2) throw std::invalid_argument("simulate_score_driven: length must be at least 2");
  const Index k_count = params.covariates();
  const Index m_count = factor_count(kind, k_count);
  if (gas.factors() != m_count) throw std::invalid_argument("simulate_score_driven: GAS size vs model");
  check_covariates(covariates, length - 1, params);

  const Index n = params.spins();
  const Index steps = length - 1;
  Matrix spins(length, n);
  spins.row(0) = random_spins(n, rng).transpose();
  FactorPath path;
  path.kind = kind;
  path.covariates = k_count;
  path.values.resize(steps, m_count);
  path.score.resize(steps, m_count);
  path.fisher.resize(steps, m_count);
  path.loglik.resize(steps);

  Vector f = gas.unconditional_mean();
  for (Index t = 0; t < steps; ++t) {
    const Vector s = spins.row(t).transpose();
    const Vector x = covariate_row(covariates, t);
    Vector s_next;
    Vector score(m_count), fisher(m_count);
    if (kind == ModelKind::dynokim) {
      const double beta = std::exp(f(0));
      const Vector g = effective_fields(s, x, params);
      s_next = sample_step(g, beta, rng);
      score(0) = score_dynokim(s_next, g, beta);
      fisher(0) = fisher_dynokim(g, beta);
      path.loglik(t) = transition_loglik(s_next, g, beta);
      path.values(t, 0) = beta;
    } else {
      const auto state = EkimFactorState::from_link(f);
      const auto d = ekim_fields(s, x, params, state);
      s_next = sample_step(d.total, 1.0, rng);
      const auto sf = score_fisher_ekim(s_next, d, state);
      score = sf.score;
      fisher = sf.fisher;
      path.loglik(t) = ekim_loglik(s_next, d);
      path.values.row(t) = state.to_natural().transpose();
    }
    spins.row(t + 1) = s_next.transpose();
    path.score.row(t) = score.transpose();
    path.fisher.row(t) = fisher.transpose();
    for (Index m = 0; m < m_count; ++m) {
      f(m) = gas.w(m) + gas.B(m) * f(m) + gas.A(m) * scaled_score(score(m), fisher(m));
    }
    if (!f.allFinite()) throw NumericalError("simulate_score_driven: non-finite factor update");
  }
  return {SpinPath(std::move(spins)), std::move(path)};
}

}  // namespace sdkim
