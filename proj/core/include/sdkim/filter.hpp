#pragma once

#include "sdkim/field_cache.hpp"
#include "sdkim/types.hpp"

#include <optional>

namespace sdkim {

/// Below this Fisher information the scaled score is taken to be zero.
inline constexpr double kFisherFloor = 1e-10;

/// I^{-1/2} score, or 0 when the information is below kFisherFloor.
double scaled_score(double score, double fisher);

/// Runs f(t+1) = w + B f(t) + A I(t)^{-1/2} score(t) over every transition.
/// Throws NumericalError (naming the time index) on a non-finite update.
FactorPath filter(const FieldCache& cache, const GasCoefficients& gas, const Vector& f_init);

/// Same, starting from w / (1 - B).
FactorPath filter(const FieldCache& cache, const GasCoefficients& gas);

FactorPath filter(ModelKind kind, const SpinPath& spins, const CovariatePath& covariates,
                  const StaticParams& params, const GasCoefficients& gas,
                  const std::optional<Vector>& f_init = std::nullopt);

struct Forecast {
  Vector prediction;   ///< +/-1
  Vector probability;  ///< p(s_i(t+1) = +1)
};

/// Thresholded one-step forecast from the lagged noise level beta(t-1).
Forecast forecast(const VecRef& s_t, const VecRef& x_t, const StaticParams& params,
                  double beta_prev, double alpha);

/// p(s_i(t+1) = +1) for every transition t >= 1 using beta(t-1) from the
/// filtered path (row t-1 of the returned matrix is transition t).
///
/// peek = true uses beta(t) instead. That variant needs s(t+1) to compute
/// beta(t), so it is NOT causal and exists only for diagnostics.
Matrix forecast_probabilities(const FieldCache& cache, const FactorPath& path, bool peek = false);

}  // namespace sdkim
