#pragma once

// Multi-step maximum likelihood: static parameters first, then the constant
// target f_bar, then (B, A) of the score-driven recursion with w tied to
// f_bar, and finally the rescaling that fixes the unit sample mean of every
// beta factor.

#include "sdkim/field_cache.hpp"
#include "sdkim/types.hpp"

#include <string>
#include <vector>

namespace sdkim {

struct StaticFit {
  StaticParams params;
  bool ridge_applied = false;
  int iterations = 0;              ///< worst-case iteration count over spins
  std::vector<Index> capped_rows;  ///< rows hitting the magnitude cap (exact MLE only)
  std::string method;              ///< "mean_field" or "exact"
};

struct MeanFieldOptions {
  int quadrature_nodes = 40;
  int max_iterations = 500;
  double tolerance = 1e-10;
  bool fit_bias = true;
};

/// Mean-field estimate of (J, h) from magnetizations, equal-time and lagged
/// covariances. Each spin's gain a_i and its field mean/spread are solved as
/// a one-dimensional fixed point. Throws NumericalError if that fixed point
/// does not settle within max_iterations.
StaticFit estimate_static_mf(const SpinPath& spins, const MeanFieldOptions& options = {});

struct ExactOptions {
  int max_iterations = 200;
  double tolerance = 1e-9;
  double cap = 50.0;
  bool fit_bias = true;
};

/// Exact static MLE: the likelihood factorizes over spins into independent
/// concave binary regressions, each solved by damped Newton steps.
StaticFit estimate_static_exact(const SpinPath& spins, const CovariatePath& covariates,
                                const ExactOptions& options = {});

/// Total log-likelihood at beta = 1.
double static_loglik(const SpinPath& spins, const CovariatePath& covariates, const StaticParams& params);

struct FbarOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;  // on the mean score per transition
};

/// Constant factor vector maximizing the likelihood (A = B = 0).
Vector estimate_fbar(const FieldCache& cache, const FbarOptions& options = {});
Vector estimate_fbar(const SpinPath& spins, const CovariatePath& covariates, const StaticParams& params,
                     ModelKind kind, const FbarOptions& options = {});

struct RecursiveLikelihood {
  double loglik = 0.0;
  Vector grad_B;
  Vector grad_A;
};

/// Log-likelihood of the targeted recursion (w = (1 - B) f_bar, f(0) = f_bar)
/// and, optionally, its exact gradient in (B, A) by forward sensitivities.
RecursiveLikelihood recursive_loglik(const FieldCache& cache, const Vector& f_bar, const Vector& B,
                                     const Vector& A, bool with_gradient = true);

struct AdamOptions {
  double step = 0.01;
  double decay1 = 0.9;
  double decay2 = 0.999;
  double epsilon = 1e-8;
  int max_iterations = 5000;
  double gradient_tolerance = 1e-6;
  // stop when the best mean log-likelihood has not improved by more than
  // plateau_tolerance for `patience` iterations
  int patience = 200;
  double plateau_tolerance = 1e-9;
  bool grid_start = true;
  double initial_B = 0.9;
  double initial_A = 0.01;
};

struct GasFit {
  GasCoefficients gas;
  double loglik = 0.0;
  int iterations = 0;
  std::vector<double> gradient_norms;
  bool converged = false;
  bool boundary = false;  ///< some |B| > 0.999 or A < 1e-6
};

/// ADAM on (atanh B, softplus^{-1} A) with w = (1 - B) f_bar held fixed.
GasFit estimate_gas(const FieldCache& cache, const Vector& f_bar, const AdamOptions& options = {});

struct Identification {
  StaticParams params;
  FactorPath path;
  Vector scales;  ///< per factor; the h0 entry repeats the beta_h scale applied to h0
};

/// Divides each beta factor by its sample mean and multiplies the matching
/// block of Theta by the same amount (whole Theta for DyNoKIM; J diagonal,
/// J off-diagonal, h together with h0, column k of b for DyEKIM). The
/// likelihood is unchanged.
Identification identify_rescale(const StaticParams& params, const FactorPath& path);

/// Coefficients that regenerate the rescaled path from the rescaled start.
GasCoefficients rescale_gas(const GasCoefficients& gas, ModelKind kind, Index covariates,
                            const Vector& scales);
Vector rescale_link(const Vector& f, ModelKind kind, Index covariates, const Vector& scales);

enum class StaticMethod { automatic, mean_field, exact };

struct FitOptions {
  // automatic: mean field for DyNoKIM without covariates, falling back to
  // exact when the mean-field equations have no solution; exact otherwise
  StaticMethod static_method = StaticMethod::automatic;
  MeanFieldOptions mean_field;
  ExactOptions exact;
  FbarOptions fbar;
  AdamOptions adam;
};

struct FitReport {
  ModelKind kind = ModelKind::dynokim;
  StaticParams params;  ///< after identification
  GasCoefficients gas;  ///< after identification
  Vector f_bar;         ///< after identification
  double loglik = 0.0;
  FactorPath path;
  Vector scales;
  std::string static_method;
  bool ridge_applied = false;
  int adam_iterations = 0;
  std::vector<double> gradient_norms;
  bool converged = false;
  bool boundary = false;
};

FitReport fit(ModelKind kind, const SpinPath& spins, const CovariatePath& covariates,
              const FitOptions& options = {});
FitReport fit_dynokim(const SpinPath& spins, const FitOptions& options = {});
FitReport fit_dyekim(const SpinPath& spins, const CovariatePath& covariates, const FitOptions& options = {});

/// Static fit alone, as used for the constant-parameter baseline.
StaticFit fit_static(const SpinPath& spins, const CovariatePath& covariates, const FitOptions& options = {});

}  // namespace sdkim
