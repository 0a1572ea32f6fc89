#pragma once

// Synthetic data: spin trajectories sampled from the model kernels, the
// deterministic/stochastic beta paths used to stress the filter, and random
// static parameters.

#include "sdkim/kernel.hpp"
#include "sdkim/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace sdkim {

using Rng = std::mt19937_64;

/// Independent generator for replication `index` of a sweep seeded with `master`.
Rng replication_rng(std::uint64_t master, std::uint64_t index);
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index);

enum class BetaPathKind { constant, sinusoid, double_step, ar1, exp_sinusoid, score_driven };

std::string to_string(BetaPathKind kind);
BetaPathKind beta_path_kind_from_string(const std::string& name);

struct BetaPathSpec {
  BetaPathKind kind = BetaPathKind::constant;
  double level = 1.0;      // constant
  double amplitude = 0.5;  // sinusoid: 1 + amplitude sin(omega t)
  double omega = 2.0 * 3.14159265358979323846 / 300.0;
  double cycles = 0.0;     // > 0 overrides omega with cycles * 2 pi / length
  // double step: level j holds from step_breaks[j-1] * length to step_breaks[j] * length
  std::vector<double> step_levels{1.0, 1.5, 0.5};
  std::vector<double> step_breaks{1.0 / 3.0, 2.0 / 3.0};
  double ar_a0 = 0.005;
  double ar_a1 = 0.995;
  double ar_sigma = 0.01;
  bool normalize = true;  // divide by the realized sample mean

  void validate() const;
};

struct GeneratedPath {
  Vector values;
  Index floored = 0;      ///< AR(1) entries lifted to kArFloor before normalization
  double raw_mean = 1.0;  ///< sample mean before normalization
};

inline constexpr double kArFloor = 1e-6;

/// Strictly positive path of `length` values. Deterministic shapes that would go
/// non-positive are rejected with std::invalid_argument.
GeneratedPath make_beta_path(const BetaPathSpec& spec, Index length, Rng& rng);

/// Hyperparameters of J_ij ~ N(J0/N, J1^2/N - J0^2/N^2), h_i ~ N(h0, h1^2).
struct ParamHyperSpec {
  double J0 = 0.0;
  double J1 = 1.0;
  double h0 = 0.0;
  double h1 = 0.0;
  Index spins = 10;

  void validate() const;
};

/// b is N x covariates zeros.
StaticParams sample_static_params(const ParamHyperSpec& spec, Rng& rng, Index covariates = 0);

/// Each s_i = +1 independently with probability e^{beta g_i} / (2 cosh beta g_i).
Vector sample_step(const VecRef& g, double beta, Rng& rng);

/// i.i.d. fair coins.
Vector random_spins(Index n, Rng& rng);

/// DyNoKIM chain: s(t+1) drawn with beta_path(t); the result has
/// beta_path.size() + 1 rows. Empty s_init draws fair coins.
SpinPath simulate_path(const StaticParams& params, const Vector& beta_path, Rng& rng,
                       const std::optional<Vector>& s_init = std::nullopt,
                       const CovariatePath* covariates = nullptr);

/// DyEKIM chain driven by a prescribed factor path.
SpinPath simulate_path(const StaticParams& params, const std::vector<EkimFactorState>& factors,
                       Rng& rng, const std::optional<Vector>& s_init = std::nullopt,
                       const CovariatePath* covariates = nullptr);

/// Jointly samples observations and factors from the score-driven recursion,
/// starting at f = w / (1 - B). The returned path holds the factors actually
/// used for each transition along with their scores and log-likelihoods.
std::pair<SpinPath, FactorPath> simulate_score_driven(ModelKind kind, const StaticParams& params,
                                                      const GasCoefficients& gas, Index length,
                                                      Rng& rng,
                                                      const CovariatePath* covariates = nullptr);

}  // namespace sdkim
