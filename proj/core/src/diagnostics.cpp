#include "sdkim/diagnostics.hpp"

#include "sdkim/estimation.hpp"
#include "sdkim/filter.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sdkim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

std::string to_string(LmNull null) {
  switch (null) {
    case LmNull::fully_static: return "fully_static";
    case LmNull::all_varying_except_tested: return "all_varying_except_tested";
  }
  return "unknown";
}

LmNull lm_null_from_string(const std::string& name) {
  if (name == "fully_static") return LmNull::fully_static;
  if (name == "all_varying_except_tested") return LmNull::all_varying_except_tested;
  throw std::invalid_argument("unknown LM null model: " + name);
}

double chi2_1_upper_tail(double x) {
  if (!(x >= 0.0)) return x < 0.0 ? 1.0 : kNaN;
  return std::erfc(std::sqrt(0.5 * x));
}

LmTestResult lm_statistic(const Vector& score, const Vector& scaled) {
  if (score.size() != scaled.size()) throw std::invalid_argument("lm_statistic: series lengths differ");
  LmTestResult out;
  const Index n = score.size() - 1;
  if (n < 2) {
    out.defined = false;
    out.statistic = out.p_value = kNaN;
    return out;
  }
  Matrix X(n, 2);
  X.col(0) = score.tail(n);
  X.col(1) = scaled.head(n).cwiseProduct(score.tail(n));
  if (!X.allFinite()) throw NumericalError("lm_statistic: non-finite regressors");
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  qr.setThreshold(1e-12);
  if (qr.rank() < 2 || X.cwiseAbs().maxCoeff() == 0.0) {
    out.defined = false;
    out.statistic = out.p_value = kNaN;
    return out;
  }
  const Vector y = Vector::Ones(n);
  const Vector coef = qr.solve(y);
  const Vector fitted = X * coef;
  out.statistic = std::max(0.0, fitted.squaredNorm());
  out.p_value = chi2_1_upper_tail(out.statistic);
  return out;
}

namespace {

LmTestResult finish(LmTestResult r, const FieldCache& cache, Index factor, LmNull null, double constant) {
  r.factor = factor;
  r.factor_name = factor_names(cache.kind(), cache.covariates())[static_cast<std::size_t>(factor)];
  r.null_model = to_string(null);
  r.tested_constant = constant;
  return r;
}

}  // namespace

LmTestResult lm_test(const FieldCache& cache, Index factor, LmNull null, const GasCoefficients* gas) {
  const Index m_count = cache.factors();
  if (factor < 0 || factor >= m_count) throw std::invalid_argument("lm_test: factor index out of range");
  const Vector f_bar = estimate_fbar(cache);

  if (null == LmNull::fully_static) {
    StepStats stats = cache.make_stats();
    Vector score(cache.steps()), scaled(cache.steps());
    for (Index t = 0; t < cache.steps(); ++t) {
      cache.evaluate(t, f_bar, stats, false);
      score(t) = stats.score(factor);
      scaled(t) = scaled_score(stats.score(factor), stats.fisher(factor));
    }
    return finish(lm_statistic(score, scaled), cache, factor, null, f_bar(factor));
  }

  if (gas == nullptr) throw std::invalid_argument("lm_test: this null model needs the recursion coefficients");
  if (gas->factors() != m_count) throw std::invalid_argument("lm_test: coefficient count does not match model");
  gas->validate();

  GasCoefficients frozen = *gas;
  frozen.B(factor) = 0.0;
  frozen.A(factor) = 0.0;
  auto path_at = [&](double c) {
    frozen.w(factor) = c;
    return filter(cache, frozen, frozen.unconditional_mean());
  };
  auto negative_ll = [&](double c) {
    try {
      return -path_at(c).total_loglik();
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const double lo = f_bar(factor) - 3.0, hi = f_bar(factor) + 3.0;
  std::uintmax_t iterations = 200;
  const auto best = boost::math::tools::brent_find_minima(negative_ll, lo, hi, 40, iterations);
  if (best.first <= lo + 1e-6 || best.first >= hi - 1e-6) {
    throw NumericalError("lm_test: null constant for the tested factor is outside the search bracket");
  }
  const FactorPath path = path_at(best.first);
  Vector score = path.score.col(factor);
  Vector scaled(path.steps());
  for (Index t = 0; t < path.steps(); ++t) scaled(t) = scaled_score(path.score(t, factor), path.fisher(t, factor));
  return finish(lm_statistic(score, scaled), cache, factor, null, best.first);
}

LmTestResult lm_test(ModelKind kind, const SpinPath& spins, const CovariatePath& covariates,
                     const StaticParams& params, Index factor, LmNull null, const GasCoefficients* gas) {
  return lm_test(FieldCache(kind, spins, covariates, params), factor, null, gas);
}

RocCurve empirical_auc(const std::vector<double>& probabilities, const std::vector<double>& outcomes) {
  if (probabilities.size() != outcomes.size()) {
    throw std::invalid_argument("empirical_auc: probabilities and outcomes differ in length");
  }
  const std::size_t n = probabilities.size();
  std::int64_t positives = 0, negatives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(probabilities[i])) throw std::invalid_argument("empirical_auc: non-finite probability");
    if (outcomes[i] == 1.0) ++positives;
    else if (outcomes[i] == -1.0) ++negatives;
    else throw std::invalid_argument("empirical_auc: outcomes must be +1 or -1");
  }
  if (positives == 0 || negatives == 0) throw std::invalid_argument("empirical_auc: need both outcome classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probabilities[a] > probabilities[b]; });

  RocCurve roc;
  roc.threshold.push_back(std::numeric_limits<double>::infinity());
  roc.fpr.push_back(0.0);
  roc.tpr.push_back(0.0);
  std::int64_t tp = 0, fp = 0;
  double twice_area = 0.0;  // in units of pairs; exact while below 2^53
  for (std::size_t i = 0; i < n;) {
    const double p = probabilities[order[i]];
    const std::int64_t tp0 = tp, fp0 = fp;
    for (; i < n && probabilities[order[i]] == p; ++i) {
      if (outcomes[order[i]] == 1.0) ++tp; else ++fp;
    }
    twice_area += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0);
    roc.threshold.push_back(p);
    roc.fpr.push_back(static_cast<double>(fp) / static_cast<double>(negatives));
    roc.tpr.push_back(static_cast<double>(tp) / static_cast<double>(positives));
  }
  roc.auc = twice_area / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
  return roc;
}

RocCurve empirical_auc(const Vector& probabilities, const Vector& outcomes) {
  return empirical_auc(std::vector<double>(probabilities.data(), probabilities.data() + probabilities.size()),
                       std::vector<double>(outcomes.data(), outcomes.data() + outcomes.size()));
}

double g_min(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("g_min: alpha must lie in (0, 1)");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("g_min: beta must be positive");
  return std::log(alpha / (1.0 - alpha)) / (2.0 * beta);
}

double p_plus(double beta, double g) { return 1.0 / (1.0 + std::exp(-2.0 * beta * g)); }

namespace {

double p_minus(double beta, double g) { return 1.0 / (1.0 + std::exp(2.0 * beta * g)); }

}  // namespace

FieldDistribution FieldDistribution::gaussian(double g0, double g1) {
  if (!std::isfinite(g0) || !(g1 > 0.0) || !std::isfinite(g1)) {
    throw std::invalid_argument("FieldDistribution::gaussian: need finite g0 and g1 > 0");
  }
  FieldDistribution d;
  d.gaussian_ = true;
  d.g0_ = g0;
  d.g1_ = g1;
  // mass beyond 12 sd is below 1e-32; wider tails only add subnormal arithmetic
  for (double z : {-12.0, -8.0, -4.0, -2.0, 0.0, 2.0, 4.0, 8.0, 12.0}) d.breaks_.push_back(g0 + z * g1);
  return d;
}

FieldDistribution FieldDistribution::histogram(std::vector<double> edges, std::vector<double> counts) {
  if (edges.size() != counts.size() + 1 || counts.empty()) {
    throw std::invalid_argument("FieldDistribution::histogram: need counts.size() + 1 edges");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (!(edges[k + 1] > edges[k])) throw std::invalid_argument("FieldDistribution::histogram: edges must increase");
    if (!(counts[k] >= 0.0) || !std::isfinite(counts[k])) {
      throw std::invalid_argument("FieldDistribution::histogram: counts must be non-negative");
    }
    total += counts[k];
  }
  if (!(total > 0.0)) throw std::invalid_argument("FieldDistribution::histogram: empty histogram");
  FieldDistribution d;
  d.gaussian_ = false;
  d.breaks_ = std::move(edges);
  d.heights_.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) d.heights_[k] = counts[k] / (total * (d.breaks_[k + 1] - d.breaks_[k]));
  d.g0_ = d.mean();
  return d;
}

FieldDistribution FieldDistribution::from_samples(const std::vector<double>& fields, int bins) {
  if (fields.size() < 2 || bins < 1) throw std::invalid_argument("FieldDistribution::from_samples: too few samples");
  const auto [lo_it, hi_it] = std::minmax_element(fields.begin(), fields.end());
  double lo = *lo_it, hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("FieldDistribution::from_samples: non-finite field");
  const double pad = hi > lo ? 1e-9 * (hi - lo) : 0.5;
  lo -= pad;
  hi += pad;
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k <= bins; ++k) edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double g : fields) {
    auto k = static_cast<std::size_t>((g - lo) / (hi - lo) * bins);
    counts[std::min(k, counts.size() - 1)] += 1.0;
  }
  return histogram(std::move(edges), std::move(counts));
}

double FieldDistribution::mean() const {
  if (gaussian_) return g0_;
  double m = 0.0;
  for (std::size_t k = 0; k < heights_.size(); ++k) {
    const double a = breaks_[k], b = breaks_[k + 1];
    m += heights_[k] * 0.5 * (b * b - a * a);
  }
  return m;
}

double FieldDistribution::density(double g) const {
  if (gaussian_) {
    const double z = (g - g0_) / g1_;
    if (std::abs(z) > 12.0) return 0.0;
    return kInvSqrt2Pi / g1_ * std::exp(-0.5 * z * z);
  }
  if (g < breaks_.front() || g >= breaks_.back()) return 0.0;
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), g);
  return heights_[static_cast<std::size_t>(it - breaks_.begin() - 1)];
}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr unsigned kMaxDepth = 20;
constexpr double kRelTol = 1e-8;

struct Integrator {
  double beta;
  const FieldDistribution& phi;
  std::vector<double> upper_mass;  // mass of phi p+ above each breakpoint
  double z_plus = 0.0, z_minus = 0.0;
  double error = 0.0;

  Integrator(double b, const FieldDistribution& d) : beta(b), phi(d) {
    const auto& br = phi.breakpoints();
    const std::size_t segs = br.size() - 1;
    upper_mass.assign(br.size(), 0.0);
    for (std::size_t k = segs; k-- > 0;) {
      double err = 0.0;
      const double plus = GK::integrate([&](double g) { return phi.density(g) * p_plus(beta, g); }, br[k], br[k + 1],
                                        kMaxDepth, kRelTol, &err);
      error += err;
      const double minus = GK::integrate([&](double g) { return phi.density(g) * p_minus(beta, g); }, br[k],
                                         br[k + 1], kMaxDepth, kRelTol, &err);
      error += err;
      upper_mass[k] = upper_mass[k + 1] + plus;
      z_plus += plus;
      z_minus += minus;
    }
  }

  std::size_t segment_of(double g) const {
    const auto& br = phi.breakpoints();
    if (g <= br.front()) return 0;
    if (g >= br.back()) return br.size() - 2;
    return static_cast<std::size_t>(std::upper_bound(br.begin(), br.end(), g) - br.begin() - 1);
  }

  // integral of phi p+ over (g, infinity)
  double upper(double g) const {
    const auto& br = phi.breakpoints();
    if (g <= br.front()) return upper_mass.front();
    if (g >= br.back()) return 0.0;
    const std::size_t k = segment_of(g);
    return upper_mass[k + 1] +
           GK::integrate([&](double x) { return phi.density(x) * p_plus(beta, x); }, g, br[k + 1], kMaxDepth,
                         kRelTol);
  }
};

}  // namespace

TheoreticalAuc theoretical_auc_detail(double beta, const FieldDistribution& phi, AucForm form, double tolerance) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("theoretical_auc: beta must be positive");
  Integrator in(beta, phi);
  const auto& br = phi.breakpoints();
  TheoreticalAuc out;
  out.z_plus = in.z_plus;
  out.z_minus = in.z_minus;
  if (!(in.z_plus > 0.0) || !(in.z_minus > 0.0)) throw NumericalError("theoretical_auc: one outcome has zero probability");

  double total = 0.0;
  double error = in.error;
  if (form == AucForm::change_of_variables) {
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
      double err = 0.0;
      total += GK::integrate([&](double g) { return phi.density(g) * p_minus(beta, g) * in.upper(g); }, br[k],
                             br[k + 1], kMaxDepth, kRelTol, &err);
      error += err;
    }
  } else {
    // alpha runs over p+ of each smooth piece of the support. Below alpha = 1/2
    // the variable is log alpha, above it log(1 - alpha), so neither the
    // 1/alpha factor nor the cancellation in 1 - alpha needs refinement.
    auto log_p_plus = [&](double g) {
      const double x = -2.0 * beta * g;
      return x > 0.0 ? -(x + std::log1p(std::exp(-x))) : -std::log1p(std::exp(x));
    };
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
      const double lo_g = br[k], hi_g = br[k + 1];
      double err = 0.0;
      if (lo_g < 0.0) {
        const double h = std::min(hi_g, 0.0);
        total += GK::integrate(
            [&](double u) {
              const double g = std::clamp((u - std::log1p(-std::exp(u))) / (2.0 * beta), lo_g, h);
              return in.upper(g) * phi.density(g) / (2.0 * beta);
            },
            log_p_plus(lo_g), log_p_plus(h), kMaxDepth, kRelTol, &err);
        error += err;
      }
      if (hi_g > 0.0) {
        const double l = std::max(lo_g, 0.0);
        total += GK::integrate(
            [&](double v) {
              const double alpha = -std::expm1(v);
              const double g = std::clamp((std::log(alpha) - v) / (2.0 * beta), l, hi_g);
              return in.upper(g) * phi.density(g) * std::exp(v) / (2.0 * beta * alpha);
            },
            log_p_plus(-hi_g), log_p_plus(-l), kMaxDepth, kRelTol, &err);
        error += err;
      }
    }
  }
  out.auc = total / (in.z_plus * in.z_minus);
  out.error_estimate = error / (in.z_plus * in.z_minus);
  if (!std::isfinite(out.auc) || out.error_estimate > tolerance) {
    std::ostringstream os;
    os << "theoretical_auc: quadrature did not reach tolerance " << tolerance << " (estimate "
       << out.error_estimate << ")";
    throw NumericalError(os.str());
  }
  return out;
}

double theoretical_auc(double beta, const FieldDistribution& phi, AucForm form) {
  return theoretical_auc_detail(beta, phi, form).auc;
}

FieldMoments gaussian_field_moments(const ParamHyperSpec& hyper, double beta) {
  hyper.validate();
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("gaussian_field_moments: beta must be positive");
  if (beta * hyper.J0 >= 1.0) {
    std::ostringstream os;
    os << "gaussian_field_moments: beta * J0 = " << beta * hyper.J0
       << " >= 1 is at or beyond the ferromagnetic transition, where the small-beta magnetization is invalid";
    throw std::invalid_argument(os.str());
  }
  FieldMoments out;
  out.m = beta * hyper.h0 / (1.0 - beta * hyper.J0);
  out.g0 = hyper.J0 * out.m + hyper.h0;
  const double var = hyper.J1 * hyper.J1 + hyper.h1 * hyper.h1 - hyper.J0 * hyper.J0 * out.m * out.m;
  if (!(var > 0.0)) throw std::invalid_argument("gaussian_field_moments: non-positive field variance");
  out.g1 = std::sqrt(var);
  return out;
}

}  // namespace sdkim
