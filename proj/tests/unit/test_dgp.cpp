#include <doctest.h>

#include "support.hpp"

#include <sdkim/dgp.hpp>

#include <cmath>

using namespace sdkim;

TEST_CASE("replication generators are deterministic and distinct") {
  Rng a = replication_rng(42, 3), b = replication_rng(42, 3), c = replication_rng(42, 4), d = replication_rng(43, 3);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  CHECK(replication_seed(1, 0) != replication_seed(1, 1));
}

TEST_CASE("deterministic beta paths") {
  Rng rng(1);
  BetaPathSpec spec;
  SUBCASE("constant") {
    spec.level = 2.0;
    spec.normalize = false;
    const GeneratedPath p = make_beta_path(spec, 10, rng);
    CHECK(p.values.size() == 10);
    CHECK(p.values.minCoeff() == 2.0);
    CHECK(p.values.maxCoeff() == 2.0);
  }
  SUBCASE("sinusoid is normalized to unit mean") {
    spec.kind = BetaPathKind::sinusoid;
    spec.amplitude = 0.5;
    const GeneratedPath p = make_beta_path(spec, 3000, rng);
    CHECK(p.values.mean() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.values.maxCoeff() / p.values.minCoeff() == doctest::Approx(3.0).epsilon(1e-3));
  }
  SUBCASE("double step holds each level for a third of the sample") {
    spec.kind = BetaPathKind::double_step;
    spec.normalize = false;
    const GeneratedPath p = make_beta_path(spec, 300, rng);
    CHECK(p.values(0) == 1.0);
    CHECK(p.values(99) == 1.0);
    CHECK(p.values(100) == 1.5);
    CHECK(p.values(199) == 1.5);
    CHECK(p.values(200) == 0.5);
    CHECK(p.values(299) == 0.5);
  }
  SUBCASE("exp sinusoid with cycles") {
    spec.kind = BetaPathKind::exp_sinusoid;
    spec.cycles = 5.0;
    spec.normalize = false;
    const GeneratedPath p = make_beta_path(spec, 1000, rng);
    CHECK(p.values(0) == doctest::Approx(1.0));
    CHECK(p.values(50) == doctest::Approx(std::exp(1.0)));
    CHECK(p.values(150) == doctest::Approx(std::exp(-1.0)));
  }
  SUBCASE("sinusoid that crosses zero is rejected") {
    spec.kind = BetaPathKind::sinusoid;
    spec.amplitude = 1.5;
    CHECK_THROWS_AS(make_beta_path(spec, 1000, rng), std::invalid_argument);
  }
  SUBCASE("score driven paths need the observations") {
    spec.kind = BetaPathKind::score_driven;
    CHECK_THROWS_AS(make_beta_path(spec, 10, rng), std::invalid_argument);
  }
}

TEST_CASE("AR(1) paths stay positive and normalized") {
  Rng rng(2);
  BetaPathSpec spec;
  spec.kind = BetaPathKind::ar1;
  for (int rep = 0; rep < 20; ++rep) {
    const GeneratedPath p = make_beta_path(spec, 3000, rng);
    CHECK(p.values.minCoeff() > 0.0);
    CHECK(p.values.mean() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.raw_mean > 0.0);
  }
}

TEST_CASE("sampled couplings have the requested moments") {
  Rng rng(3);
  ParamHyperSpec hyper;
  hyper.spins = 400;
  hyper.J0 = 0.5;
  hyper.J1 = 1.5;
  hyper.h0 = 0.2;
  hyper.h1 = 1.0;
  const StaticParams p = sample_static_params(hyper, rng, 2);
  const double n = 400.0;
  const double mean = p.J.mean();
  const double var = (p.J.array() - mean).square().mean();
  CHECK(mean * n == doctest::Approx(0.5).epsilon(0.1));
  CHECK(var * n == doctest::Approx(1.5 * 1.5 - 0.25 / n).epsilon(0.03));
  CHECK(p.h.mean() == doctest::Approx(0.2).epsilon(0.5));
  CHECK(p.b.rows() == 400);
  CHECK(p.b.cols() == 2);
  CHECK(p.b.norm() == 0.0);
}

TEST_CASE("sampled spins follow the logistic probability") {
  Rng rng(4);
  const Vector g = (Vector(3) << -0.8, 0.0, 1.3).finished();
  const double beta = 0.7;
  Vector plus = Vector::Zero(3);
  const int draws = 40000;
  for (int k = 0; k < draws; ++k) plus += (sample_step(g, beta, rng).array() > 0.0).cast<double>().matrix();
  for (Index i = 0; i < 3; ++i) {
    const double p = std::exp(beta * g(i)) / (2.0 * std::cosh(beta * g(i)));
    const double se = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(plus(i) / draws - p) < 4.0 * se);
  }
}

TEST_CASE("simulated paths have the expected shape and are reproducible") {
  ParamHyperSpec hyper;
  hyper.spins = 7;
  Rng a(9), b(9);
  const StaticParams pa = sample_static_params(hyper, a);
  const StaticParams pb = sample_static_params(hyper, b);
  const SpinPath sa = simulate_path(pa, Vector::Constant(20, 1.0), a);
  const SpinPath sb = simulate_path(pb, Vector::Constant(20, 1.0), b);
  CHECK(sa.length() == 21);
  CHECK(sa.spins() == 7);
  CHECK(sa.values() == sb.values());
  CHECK((sa.values().array().abs() == 1.0).all());

  std::vector<EkimFactorState> factors(20, EkimFactorState::unit(0));
  const SpinPath se = simulate_path(pa, factors, a);
  CHECK(se.length() == 21);

  const GasCoefficients gas =
      GasCoefficients::targeted(Vector::Zero(1), Vector::Constant(1, 0.9), Vector::Constant(1, 0.1));
  const auto [spins, path] = simulate_score_driven(ModelKind::dynokim, pa, gas, 30, a);
  CHECK(spins.length() == 30);
  CHECK(path.steps() == 29);
  CHECK(path.values(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("non-positive beta paths are rejected") {
  Rng rng(5);
  ParamHyperSpec hyper;
  hyper.spins = 3;
  const StaticParams p = sample_static_params(hyper, rng);
  CHECK_THROWS_AS(simulate_path(p, Vector::Constant(5, -1.0), rng), std::invalid_argument);
}
