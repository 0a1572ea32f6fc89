#include <doctest.h>

#include "support.hpp"

#include <sdkim/dgp.hpp>
#include <sdkim/filter.hpp>

#include <cmath>

using namespace sdkim;

namespace {

GasCoefficients scalar_gas(double f_bar, double B, double A) {
  return GasCoefficients::targeted(Vector::Constant(1, f_bar), Vector::Constant(1, B), Vector::Constant(1, A));
}

}  // namespace

TEST_CASE("zero score loading gives a constant path") {
  Rng rng(1);
  ParamHyperSpec hyper;
  hyper.spins = 8;
  const StaticParams p = sample_static_params(hyper, rng);
  const SpinPath s = simulate_path(p, Vector::Constant(99, 1.0), rng);
  const FactorPath path = filter(ModelKind::dynokim, s, CovariatePath::none(100), p, scalar_gas(0.3, 0.7, 0.0));
  CHECK(path.steps() == 99);
  for (Index t = 0; t < path.steps(); ++t) CHECK(path.values(t, 0) == doctest::Approx(std::exp(0.3)));
}

TEST_CASE("filtered path follows the recursion written out by hand") {
  Rng rng(2);
  ParamHyperSpec hyper;
  hyper.spins = 6;
  hyper.h1 = 0.3;
  const StaticParams p = sample_static_params(hyper, rng);
  const SpinPath s = simulate_path(p, Vector::Constant(49, 1.2), rng);
  const GasCoefficients gas = scalar_gas(0.1, 0.9, 0.05);
  const FactorPath path = filter(ModelKind::dynokim, s, CovariatePath::none(50), p, gas);
  double f = 0.1;
  double total = 0.0;
  for (Index t = 0; t < 49; ++t) {
    const Vector g = effective_fields(s.at(t), Vector(0), p);
    const double beta = std::exp(f);
    CHECK(path.values(t, 0) == doctest::Approx(beta).epsilon(1e-12));
    const double ll = transition_loglik(s.at(t + 1), g, beta);
    CHECK(path.loglik(t) == doctest::Approx(ll).epsilon(1e-12));
    total += ll;
    const double sc = score_dynokim(s.at(t + 1), g, beta);
    const double info = fisher_dynokim(g, beta);
    f = gas.w(0) + gas.B(0) * f + gas.A(0) * sc / std::sqrt(info);
  }
  CHECK(path.total_loglik() == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("filtering simulated data with the true coefficients recovers the simulated factors") {
  Rng rng(3);
  ParamHyperSpec hyper;
  hyper.spins = 10;
  const StaticParams p = sample_static_params(hyper, rng);
  SUBCASE("DyNoKIM") {
    const GasCoefficients gas = scalar_gas(0.0, 0.95, 0.05);
    const auto [spins, truth] = simulate_score_driven(ModelKind::dynokim, p, gas, 300, rng);
    const FactorPath path = filter(ModelKind::dynokim, spins, CovariatePath::none(300), p, gas);
    CHECK((path.values - truth.values).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("DyEKIM") {
    const GasCoefficients gas =
        GasCoefficients::targeted(Vector::Zero(4), Vector::Constant(4, 0.9), Vector::Constant(4, 0.03));
    const auto [spins, truth] = simulate_score_driven(ModelKind::dyekim, p, gas, 300, rng);
    const FactorPath path = filter(ModelKind::dyekim, spins, CovariatePath::none(300), p, gas);
    CHECK((path.values - truth.values).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("scaled scores have mean zero under the true model") {
  Rng rng(4);
  ParamHyperSpec hyper;
  hyper.spins = 10;
  const StaticParams p = sample_static_params(hyper, rng);
  const GasCoefficients gas = scalar_gas(0.0, 0.95, 0.01);
  const Index T = 10000;
  const auto [spins, truth] = simulate_score_driven(ModelKind::dynokim, p, gas, T, rng);
  double sum = 0.0, sq = 0.0;
  for (Index t = 0; t < truth.steps(); ++t) {
    const double z = scaled_score(truth.score(t, 0), truth.fisher(t, 0));
    sum += z;
    sq += z * z;
  }
  const double n = static_cast<double>(truth.steps());
  const double mean = sum / n;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
  // unit variance by construction of the I^{-1/2} scaling
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("scaled score is zero below the Fisher floor") {
  CHECK(scaled_score(3.0, 0.0) == 0.0);
  CHECK(scaled_score(3.0, kFisherFloor / 2) == 0.0);
  CHECK(scaled_score(3.0, 4.0) == doctest::Approx(1.5));
}

TEST_CASE("causal forecasts use the previous factor value") {
  Rng rng(5);
  ParamHyperSpec hyper;
  hyper.spins = 5;
  const StaticParams p = sample_static_params(hyper, rng);
  const GasCoefficients gas = scalar_gas(0.0, 0.9, 0.1);
  const auto [spins, truth] = simulate_score_driven(ModelKind::dynokim, p, gas, 40, rng);
  const FieldCache cache(ModelKind::dynokim, spins, CovariatePath::none(40), p);
  const FactorPath path = filter(cache, gas);
  const Matrix causal = forecast_probabilities(cache, path);
  const Matrix peek = forecast_probabilities(cache, path, true);
  REQUIRE(causal.rows() == path.steps() - 1);
  for (Index r = 0; r < causal.rows(); ++r) {
    const Vector g = effective_fields(spins.at(r + 1), Vector(0), p);
    for (Index i = 0; i < 5; ++i) {
      const double b_prev = path.values(r, 0), b_now = path.values(r + 1, 0);
      CHECK(causal(r, i) == doctest::Approx(std::exp(b_prev * g(i)) / (2.0 * std::cosh(b_prev * g(i)))));
      CHECK(peek(r, i) == doctest::Approx(std::exp(b_now * g(i)) / (2.0 * std::cosh(b_now * g(i)))));
    }
    const Forecast fc = forecast(spins.at(r + 1), Vector(0), p, path.values(r, 0), 0.5);
    CHECK((fc.probability.transpose() - causal.row(r)).norm() < 1e-12);
    for (Index i = 0; i < 5; ++i) CHECK(fc.prediction(i) == (fc.probability(i) >= 0.5 ? 1.0 : -1.0));
  }
}

TEST_CASE("mismatched coefficient sizes are rejected") {
  Rng rng(6);
  ParamHyperSpec hyper;
  hyper.spins = 3;
  const StaticParams p = sample_static_params(hyper, rng);
  const SpinPath s = simulate_path(p, Vector::Constant(9, 1.0), rng);
  const GasCoefficients gas =
      GasCoefficients::targeted(Vector::Zero(2), Vector::Constant(2, 0.5), Vector::Constant(2, 0.1));
  CHECK_THROWS_AS(filter(ModelKind::dynokim, s, CovariatePath::none(10), p, gas), std::invalid_argument);
}
