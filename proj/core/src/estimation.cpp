#include "sdkim/estimation.hpp"

#include "sdkim/filter.hpp"
#include "sdkim/kernel.hpp"
#include "sdkim/quadrature.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sdkim {

namespace {

constexpr double kMagnetizationClamp = 1.0 - 1e-9;

double softplus(double u) { return u > 30.0 ? u : std::log1p(std::exp(u)); }
double softplus_inverse(double a) { return a > 30.0 ? a : std::log(std::expm1(a)); }
double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// Field offset b solving m = E[tanh(b + x delta)], safeguarded Newton on a bracket.
double solve_field_mean(double m, double delta, const GaussHermite& gh) {
  if (delta == 0.0) return std::atanh(m);
  double lo = -60.0, hi = 60.0;
  double b = std::atanh(m);
  for (int it = 0; it < 200; ++it) {
    const double value = gh.expect([&](double x) { return std::tanh(b + x * delta); }) - m;
    const double slope = gh.expect([&](double x) {
      const double t = std::tanh(b + x * delta);
      return 1.0 - t * t;
    });
    if (value > 0.0) hi = b; else lo = b;
    if (std::abs(value) < 1e-14) break;
    double next = slope > 1e-300 ? b - value / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - b) < 1e-15 * (1.0 + std::abs(b))) {
      b = next;
      break;
    }
    b = next;
  }
  return b;
}

double gain(double b, double delta, const GaussHermite& gh) {
  return gh.expect([&](double x) {
    const double t = std::tanh(b + x * delta);
    return 1.0 - t * t;
  });
}

}  // namespace

StaticFit estimate_static_mf(const SpinPath& spins, const MeanFieldOptions& options) {
  const Index n = spins.spins();
  const Index steps = spins.transitions();
  const Matrix& s = spins.values();
  const GaussHermite gh(options.quadrature_nodes);

  Vector m = s.colwise().mean().transpose();
  m = m.cwiseMax(-kMagnetizationClamp).cwiseMin(kMagnetizationClamp);
  const Matrix now = s.topRows(steps).rowwise() - m.transpose();
  const Matrix next = s.bottomRows(steps).rowwise() - m.transpose();
  const double denom = static_cast<double>(steps);
  Matrix C = (now.transpose() * now) / denom;
  const Matrix D = (next.transpose() * now) / denom;

  StaticFit out;
  out.method = "mean_field";
  Eigen::LLT<Matrix> llt(C);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
    const double ridge = 1e-8 * C.trace() / static_cast<double>(n);
    C.diagonal().array() += std::max(ridge, 1e-300);
    llt.compute(C);
    out.ridge_applied = true;
    if (llt.info() != Eigen::Success) throw NumericalError("estimate_static_mf: equal-time covariance is singular");
  }
  // rows of M = D C^{-1}
  const Matrix M = llt.solve(D.transpose()).transpose();

  const Vector spread = (1.0 - m.array().square()).matrix();
  out.params = StaticParams::zeros(n);
  for (Index i = 0; i < n; ++i) {
    const double gamma = std::sqrt(M.row(i).array().square().matrix().dot(spread));
    double a = 1.0;
    double b = 0.0;
    bool settled = false;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
      const double delta = gamma / a;
      b = solve_field_mean(m(i), delta, gh);
      double a_next = gain(b, delta, gh);
      if (it >= 50) a_next = 0.5 * (a + a_next);  // damp slow or oscillating cases
      if (std::abs(a_next - a) < options.tolerance * std::max(1.0, a)) {
        a = a_next;
        b = solve_field_mean(m(i), gamma / a, gh);
        settled = true;
        break;
      }
      a = a_next;
    }
    if (!settled || !(a > 0.0)) {
      std::ostringstream os;
      os << "estimate_static_mf: gain fixed point for spin " << i << " did not converge (lagged correlation norm "
         << gamma << ")";
      throw NumericalError(os.str());
    }
    out.iterations = std::max(out.iterations, it + 1);
    out.params.J.row(i) = M.row(i) / a;
    if (options.fit_bias) out.params.h(i) = b - out.params.J.row(i).dot(m);
  }
  return out;
}

StaticFit estimate_static_exact(const SpinPath& spins, const CovariatePath& covariates,
                                const ExactOptions& options) {
  if (covariates.length() != spins.length()) {
    throw std::invalid_argument("estimate_static_exact: covariate length differs from spin length");
  }
  const Index n = spins.spins();
  const Index k = covariates.count();
  const Index steps = spins.transitions();
  const Index bias_cols = options.fit_bias ? 1 : 0;
  const Index p = n + bias_cols + k;

  Matrix X(steps, p);
  X.leftCols(n) = spins.values().topRows(steps);
  if (options.fit_bias) X.col(n).setOnes();
  if (k > 0) X.rightCols(k) = covariates.values().topRows(steps);
  const Matrix Y = spins.values().bottomRows(steps);

  StaticFit out;
  out.method = "exact";
  out.params = StaticParams::zeros(n, k);
  const double scale = static_cast<double>(steps);

  auto objective = [&](const Vector& eta, Index i) {
    double ll = 0.0;
    for (Index t = 0; t < steps; ++t) ll += Y(t, i) * eta(t) - log_2cosh(eta(t));
    return ll;
  };

  for (Index i = 0; i < n; ++i) {
    Vector theta = Vector::Zero(p);
    Vector eta = Vector::Zero(steps);
    double ll = objective(eta, i);
    bool capped = false;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
      const Vector tau = eta.array().tanh().matrix();
      const Vector grad = X.transpose() * (Y.col(i) - tau);
      if (grad.cwiseAbs().maxCoeff() < options.tolerance * scale) break;
      const Vector w = (1.0 - tau.array().square()).matrix();
      Matrix H = X.transpose() * w.asDiagonal() * X;
      H.diagonal().array() += 1e-12 * scale;
      const Vector step = H.ldlt().solve(grad);
      double t_step = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 50; ++ls) {
        const Vector cand = theta + t_step * step;
        const Vector cand_eta = X * cand;
        const double cand_ll = objective(cand_eta, i);
        if (cand_ll >= ll - 1e-12 * std::abs(ll)) {
          theta = cand;
          eta = cand_eta;
          improved = cand_ll > ll;
          ll = cand_ll;
          break;
        }
        t_step *= 0.5;
      }
      if (theta.cwiseAbs().maxCoeff() > options.cap) {
        theta *= options.cap / theta.cwiseAbs().maxCoeff();
        capped = true;
        break;
      }
      if (!improved) break;
    }
    out.iterations = std::max(out.iterations, it + 1);
    if (capped) out.capped_rows.push_back(i);
    out.params.J.row(i) = theta.head(n).transpose();
    if (options.fit_bias) out.params.h(i) = theta(n);
    if (k > 0) out.params.b.row(i) = theta.tail(k).transpose();
  }
  return out;
}

double static_loglik(const SpinPath& spins, const CovariatePath& covariates, const StaticParams& params) {
  double ll = 0.0;
  for (Index t = 0; t < spins.transitions(); ++t) {
    const Vector g = effective_fields(spins.at(t), covariates.at(t), params);
    ll += transition_loglik(spins.at(t + 1), g, 1.0);
  }
  return ll;
}

namespace {

double constant_loglik(const FieldCache& cache, const Vector& f, StepStats& stats) {
  double ll = 0.0;
  for (Index t = 0; t < cache.steps(); ++t) {
    cache.evaluate(t, f, stats, false);
    ll += stats.loglik;
  }
  return ll;
}

}  // namespace

Vector estimate_fbar(const FieldCache& cache, const FbarOptions& options) {
  const Index m_count = cache.factors();
  const double scale = static_cast<double>(cache.steps());
  StepStats stats = cache.make_stats();
  Vector f = Vector::Zero(m_count);
  double ll = constant_loglik(cache, f, stats);
  for (int it = 0; it < options.max_iterations; ++it) {
    Vector grad = Vector::Zero(m_count);
    Matrix hess = Matrix::Zero(m_count, m_count);
    Matrix info = Matrix::Zero(m_count, m_count);
    for (Index t = 0; t < cache.steps(); ++t) {
      cache.evaluate(t, f, stats, true);
      grad += stats.score;
      hess += stats.dscore;
      info += stats.info;
    }
    if (grad.cwiseAbs().maxCoeff() < options.tolerance * scale) return f;

    // Newton on the observed Hessian when it is negative definite, Fisher scoring otherwise
    Matrix neg_hess = -0.5 * (hess + hess.transpose());
    Eigen::LLT<Matrix> llt(neg_hess);
    if (llt.info() != Eigen::Success) {
      neg_hess = info;
      neg_hess.diagonal().array() += 1e-10 * (1.0 + info.diagonal().cwiseAbs().maxCoeff());
      llt.compute(neg_hess);
      if (llt.info() != Eigen::Success) throw NumericalError("estimate_fbar: information matrix is singular");
    }
    const Vector step = llt.solve(grad);
    double t_step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector cand = f + t_step * step;
      const double cand_ll = constant_loglik(cache, cand, stats);
      // near the optimum the gain is below rounding noise in the summed likelihood
      if (std::isfinite(cand_ll) && cand_ll >= ll - 1e-12 * (1.0 + std::abs(ll))) {
        f = cand;
        ll = cand_ll;
        moved = true;
        break;
      }
      t_step *= 0.5;
    }
    if (!moved) {
      // no ascent along the Newton direction; accept if the gradient is already tiny
      if (grad.cwiseAbs().maxCoeff() < 1e3 * options.tolerance * scale) return f;
      throw NumericalError("estimate_fbar: line search failed");
    }
  }
  throw NumericalError("estimate_fbar: did not converge");
}

Vector estimate_fbar(const SpinPath& spins, const CovariatePath& covariates, const StaticParams& params,
                     ModelKind kind, const FbarOptions& options) {
  return estimate_fbar(FieldCache(kind, spins, covariates, params), options);
}

RecursiveLikelihood recursive_loglik(const FieldCache& cache, const Vector& f_bar, const Vector& B,
                                     const Vector& A, bool with_gradient) {
  const Index m_count = cache.factors();
  if (f_bar.size() != m_count || B.size() != m_count || A.size() != m_count) {
    throw std::invalid_argument("recursive_loglik: parameter sizes do not match the model");
  }
  StepStats stats = cache.make_stats();
  RecursiveLikelihood out;
  out.grad_B = Vector::Zero(m_count);
  out.grad_A = Vector::Zero(m_count);

  Vector f = f_bar;
  Vector scaled(m_count);
  // sens(m, j): d f_m / d theta_j, theta = (B_1..B_M, A_1..A_M)
  Matrix sens = Matrix::Zero(m_count, 2 * m_count);
  Matrix sens_next(m_count, 2 * m_count);
  Matrix dscaled(m_count, m_count);
  Vector grad = Vector::Zero(2 * m_count);

  for (Index t = 0; t < cache.steps(); ++t) {
    cache.evaluate(t, f, stats, with_gradient);
    out.loglik += stats.loglik;
    for (Index m = 0; m < m_count; ++m) scaled(m) = scaled_score(stats.score(m), stats.fisher(m));

    if (with_gradient) {
      grad.noalias() += sens.transpose() * stats.score;
      for (Index m = 0; m < m_count; ++m) {
        const double info = stats.fisher(m);
        if (info >= kFisherFloor) {
          const double root = std::sqrt(info);
          dscaled.row(m) = stats.dscore.row(m) / root -
                           0.5 * stats.score(m) / (info * root) * stats.dfisher.row(m);
        } else {
          dscaled.row(m).setZero();
        }
      }
      sens_next.noalias() = A.asDiagonal() * (dscaled * sens);
      sens_next += B.asDiagonal() * sens;
      for (Index m = 0; m < m_count; ++m) {
        sens_next(m, m) += f(m) - f_bar(m);
        sens_next(m, m_count + m) += scaled(m);
      }
      sens.swap(sens_next);
    }
    for (Index m = 0; m < m_count; ++m) {
      f(m) = (1.0 - B(m)) * f_bar(m) + B(m) * f(m) + A(m) * scaled(m);
    }
    if (!f.allFinite()) {
      out.loglik = -std::numeric_limits<double>::infinity();
      return out;
    }
  }
  out.grad_B = grad.head(m_count);
  out.grad_A = grad.tail(m_count);
  return out;
}

GasFit estimate_gas(const FieldCache& cache, const Vector& f_bar, const AdamOptions& options) {
  const Index m_count = cache.factors();
  const double scale = static_cast<double>(cache.steps());

  Vector B = Vector::Constant(m_count, options.initial_B);
  Vector A = Vector::Constant(m_count, options.initial_A);
  if (options.grid_start) {
    double best = -std::numeric_limits<double>::infinity();
    for (double b : {0.0, 0.5, 0.8, 0.9, 0.95, 0.98, 0.995}) {
      for (double a : {0.001, 0.005, 0.01, 0.03, 0.1, 0.3}) {
        const Vector Bc = Vector::Constant(m_count, b);
        const Vector Ac = Vector::Constant(m_count, a);
        const double ll = recursive_loglik(cache, f_bar, Bc, Ac, false).loglik;
        if (ll > best) {
          best = ll;
          B = Bc;
          A = Ac;
        }
      }
    }
  }

  const Index dim = 2 * m_count;
  Vector u(dim);
  for (Index m = 0; m < m_count; ++m) {
    u(m) = std::atanh(B(m));
    u(m_count + m) = softplus_inverse(A(m));
  }
  auto unpack = [&](const Vector& x, Vector& Bo, Vector& Ao) {
    for (Index m = 0; m < m_count; ++m) {
      Bo(m) = std::tanh(x(m));
      Ao(m) = softplus(x(m_count + m));
    }
  };

  GasFit out;
  Vector moment1 = Vector::Zero(dim), moment2 = Vector::Zero(dim);
  Vector best_u = u;
  double best_obj = -std::numeric_limits<double>::infinity();
  int since_improvement = 0;
  double step = options.step;
  Vector Bc(m_count), Ac(m_count), g(dim);

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    unpack(u, Bc, Ac);
    const auto rl = recursive_loglik(cache, f_bar, Bc, Ac, true);
    const double obj = rl.loglik / scale;
    if (!std::isfinite(obj)) {
      // diverging recursion: go back to the best point with a smaller step
      u = best_u;
      step *= 0.5;
      moment1.setZero();
      moment2.setZero();
      if (step < 1e-8) break;
      continue;
    }
    for (Index m = 0; m < m_count; ++m) {
      g(m) = rl.grad_B(m) * (1.0 - Bc(m) * Bc(m)) / scale;
      g(m_count + m) = rl.grad_A(m) * logistic(u(m_count + m)) / scale;
    }
    const double gnorm = g.norm();
    out.gradient_norms.push_back(gnorm);
    if (obj > best_obj + options.plateau_tolerance) {
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (obj > best_obj) {
      best_obj = obj;
      best_u = u;
    }
    if (gnorm < options.gradient_tolerance) {
      out.converged = true;
      break;
    }
    if (since_improvement >= options.patience) {
      out.converged = true;
      break;
    }
    const double t1 = static_cast<double>(it + 1);
    moment1 = options.decay1 * moment1 + (1.0 - options.decay1) * g;
    moment2 = options.decay2 * moment2 + (1.0 - options.decay2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(options.decay1, t1);
    const double c2 = 1.0 - std::pow(options.decay2, t1);
    u.array() += step * (moment1.array() / c1) / ((moment2.array() / c2).sqrt() + options.epsilon);
  }
  if (!std::isfinite(best_obj)) throw NumericalError("estimate_gas: recursion diverged for every trial point");
  out.iterations = it;
  unpack(best_u, Bc, Ac);
  out.gas = GasCoefficients::targeted(f_bar, Bc, Ac);
  out.loglik = best_obj * scale;
  out.boundary = (Bc.array().abs() > 0.999).any() || (Ac.array() < 1e-6).any();
  return out;
}

Identification identify_rescale(const StaticParams& params, const FactorPath& path) {
  params.validate();
  if (path.steps() == 0) throw std::invalid_argument("identify_rescale: empty factor path");
  const Index m_count = path.factors();
  const Index k_count = path.covariates;
  if (m_count != factor_count(path.kind, k_count)) throw std::invalid_argument("identify_rescale: path shape");

  Identification out{params, path, Vector::Ones(m_count)};
  for (Index m = 0; m < m_count; ++m) {
    if (!is_log_linked(path.kind, k_count, m)) continue;
    const double mu = path.values.col(m).mean();
    if (!(mu > 0.0)) throw std::invalid_argument("identify_rescale: beta factor has non-positive mean");
    out.scales(m) = mu;
    out.path.values.col(m) /= mu;
  }
  if (path.kind == ModelKind::dynokim) {
    const double mu = out.scales(0);
    out.params.J *= mu;
    out.params.h *= mu;
    out.params.b *= mu;
    return out;
  }
  const double mu_diag = out.scales(0), mu_off = out.scales(1), mu_h = out.scales(2);
  const Index n = params.spins();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) out.params.J(i, j) *= (i == j) ? mu_diag : mu_off;
  }
  out.params.h *= mu_h;
  for (Index k = 0; k < k_count; ++k) out.params.b.col(k) *= out.scales(3 + k);
  // beta_h (h_i + h0) is preserved only if h0 scales with h
  const Index h0 = m_count - 1;
  out.scales(h0) = mu_h;
  out.path.values.col(h0) *= mu_h;
  out.path.score.col(h0) /= mu_h;
  out.path.fisher.col(h0) /= mu_h * mu_h;
  return out;
}

Vector rescale_link(const Vector& f, ModelKind kind, Index covariates, const Vector& scales) {
  Vector out = f;
  for (Index m = 0; m < f.size(); ++m) {
    if (is_log_linked(kind, covariates, m)) out(m) -= std::log(scales(m));
    else out(m) *= scales(m);
  }
  return out;
}

GasCoefficients rescale_gas(const GasCoefficients& gas, ModelKind kind, Index covariates, const Vector& scales) {
  GasCoefficients out = gas;
  for (Index m = 0; m < gas.factors(); ++m) {
    if (is_log_linked(kind, covariates, m)) {
      out.w(m) = gas.w(m) - (1.0 - gas.B(m)) * std::log(scales(m));
    } else {
      out.w(m) = gas.w(m) * scales(m);
      out.A(m) = gas.A(m) * scales(m);
    }
  }
  return out;
}

StaticFit fit_static(const SpinPath& spins, const CovariatePath& covariates, const FitOptions& options) {
  const bool exact = options.static_method == StaticMethod::exact ||
                     (options.static_method == StaticMethod::automatic && covariates.count() > 0);
  if (exact) return estimate_static_exact(spins, covariates, options.exact);
  if (covariates.count() > 0) {
    throw std::invalid_argument("fit_static: the mean-field estimator has no covariate loadings; use exact");
  }
  if (options.static_method == StaticMethod::mean_field) return estimate_static_mf(spins, options.mean_field);
  // Short samples can put the lagged correlations beyond the range the
  // mean-field equations admit; the exact MLE has no such restriction.
  try {
    return estimate_static_mf(spins, options.mean_field);
  } catch (const NumericalError&) {
    return estimate_static_exact(spins, covariates, options.exact);
  }
}

FitReport fit(ModelKind kind, const SpinPath& spins, const CovariatePath& covariates, const FitOptions& options) {
  // Mean-field bias estimates degrade when the partial betas move apart, and
  // DyEKIM attributes that bias to beta_h; its default static step is exact.
  FitOptions static_options = options;
  if (kind == ModelKind::dyekim && options.static_method == StaticMethod::automatic) {
    static_options.static_method = StaticMethod::exact;
  }
  const StaticFit stat = fit_static(spins, covariates, static_options);
  const FieldCache cache(kind, spins, covariates, stat.params);
  const Vector f_bar = estimate_fbar(cache, options.fbar);
  const GasFit gas_fit = estimate_gas(cache, f_bar, options.adam);
  const FactorPath path = filter(cache, gas_fit.gas, f_bar);
  Identification id = identify_rescale(stat.params, path);

  FitReport report;
  report.kind = kind;
  report.params = std::move(id.params);
  report.gas = rescale_gas(gas_fit.gas, kind, covariates.count(), id.scales);
  report.f_bar = rescale_link(f_bar, kind, covariates.count(), id.scales);
  report.path = std::move(id.path);
  report.loglik = report.path.total_loglik();
  report.scales = id.scales;
  report.static_method = stat.method;
  report.ridge_applied = stat.ridge_applied;
  report.adam_iterations = gas_fit.iterations;
  report.gradient_norms = gas_fit.gradient_norms;
  report.converged = gas_fit.converged;
  report.boundary = gas_fit.boundary;
  return report;
}

FitReport fit_dynokim(const SpinPath& spins, const FitOptions& options) {
  return fit(ModelKind::dynokim, spins, CovariatePath::none(spins.length()), options);
}

FitReport fit_dyekim(const SpinPath& spins, const CovariatePath& covariates, const FitOptions& options) {
  return fit(ModelKind::dyekim, spins, covariates, options);
}

}  // namespace sdkim
