#pragma once

#include "sdkim/dgp.hpp"
#include "sdkim/field_cache.hpp"
#include "sdkim/types.hpp"

#include <string>
#include <vector>

namespace sdkim {

// ---------------------------------------------------------------------------
// Lagrange-multiplier test for time variation of one factor

enum class LmNull {
  fully_static,                // every factor constant at its joint constant MLE
  all_varying_except_tested,   // others follow the supplied recursion
};

std::string to_string(LmNull null);
LmNull lm_null_from_string(const std::string& name);

struct LmTestResult {
  double statistic = 0.0;  ///< explained sum of squares of the auxiliary regression
  double p_value = 1.0;
  int dof = 1;
  Index factor = 0;
  std::string factor_name;
  std::string null_model;
  bool defined = true;  ///< false when the regressors are degenerate; statistic and p are NaN
  double tested_constant = 0.0;  ///< null value of the tested factor (link space)
};

/// Upper tail of the chi-square distribution with one degree of freedom.
double chi2_1_upper_tail(double x);

/// Regresses 1 on (score_t, scaled_{t-1} score_t), t = 1..n-1, without intercept.
LmTestResult lm_statistic(const Vector& score, const Vector& scaled_score);

/// `gas` is required for all_varying_except_tested and ignored otherwise.
LmTestResult lm_test(const FieldCache& cache, Index factor, LmNull null,
                     const GasCoefficients* gas = nullptr);

LmTestResult lm_test(ModelKind kind, const SpinPath& spins, const CovariatePath& covariates,
                     const StaticParams& params, Index factor, LmNull null,
                     const GasCoefficients* gas = nullptr);

// ---------------------------------------------------------------------------
// Classifier quality

struct RocCurve {
  std::vector<double> threshold;  ///< descending; +inf for the (0, 0) start point
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auc = 0.0;
};

/// Threshold sweep over the distinct probabilities; tied scores move as one
/// block so the trapezoid area equals the Mann-Whitney statistic with ties
/// counted one half. Throws std::invalid_argument on single-class input.
RocCurve empirical_auc(const std::vector<double>& probabilities, const std::vector<double>& outcomes);
RocCurve empirical_auc(const Vector& probabilities, const Vector& outcomes);

/// Field value at which p(+1) equals alpha.
double g_min(double alpha, double beta);

/// p(s = +1 | g) = e^{beta g} / (2 cosh beta g).
double p_plus(double beta, double g);

/// Unconditional distribution of effective fields.
class FieldDistribution {
 public:
  static FieldDistribution gaussian(double g0, double g1);
  /// Piecewise-constant density; `edges` ascending with counts.size() + 1 entries.
  static FieldDistribution histogram(std::vector<double> edges, std::vector<double> counts);
  /// Histogram of measured fields with `bins` equal-width bins.
  static FieldDistribution from_samples(const std::vector<double>& fields, int bins = 200);

  bool is_gaussian() const { return gaussian_; }
  double mean() const;
  double density(double g) const;
  /// Intervals on which the density is smooth, covering the effective support.
  const std::vector<double>& breakpoints() const { return breaks_; }

 private:
  bool gaussian_ = true;
  double g0_ = 0.0, g1_ = 1.0;
  std::vector<double> breaks_;
  std::vector<double> heights_;  // histogram densities, one per interval
};

enum class AucForm {
  change_of_variables,  ///< P(g+ > g-) written as a double integral over fields
  threshold,            ///< outer integral over the threshold alpha in (0, 1)
};

struct TheoreticalAuc {
  double auc = 0.5;
  double error_estimate = 0.0;
  double z_plus = 0.5;
  double z_minus = 0.5;
};

/// Expected AUC of thresholded forecasts when fields follow `phi`. Throws
/// NumericalError if the quadrature error estimate exceeds `tolerance`.
TheoreticalAuc theoretical_auc_detail(double beta, const FieldDistribution& phi,
                                      AucForm form = AucForm::change_of_variables, double tolerance = 1e-6);
double theoretical_auc(double beta, const FieldDistribution& phi,
                       AucForm form = AucForm::change_of_variables);

struct FieldMoments {
  double m = 0.0;
  double g0 = 0.0;
  double g1 = 1.0;
};

/// Small-beta moments of the field distribution for Gaussian J and h.
/// Throws std::invalid_argument if beta J0 >= 1.
FieldMoments gaussian_field_moments(const ParamHyperSpec& hyper, double beta);

}  // namespace sdkim
