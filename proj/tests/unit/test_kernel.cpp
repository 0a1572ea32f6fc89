#include <doctest.h>

#include "support.hpp"

#include <sdkim/kernel.hpp>

#include <cmath>

using namespace sdkim;
using sdkim::test::close;

TEST_CASE("log_2cosh matches the direct formula and stays finite for large arguments") {
  for (double x : {-5.0, -0.3, 0.0, 0.7, 12.0}) {
    CHECK(log_2cosh(x) == doctest::Approx(std::log(2.0 * std::cosh(x))).epsilon(1e-14));
  }
  CHECK(log_2cosh(1e4) == doctest::Approx(1e4));
  CHECK(log_2cosh(-1e4) == doctest::Approx(1e4));
}

TEST_CASE("transition probabilities sum to one over all outcomes") {
  Rng rng(7);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (Index n = 1; n <= 4; ++n) {
    const Matrix outcomes = test::all_configurations(n);
    for (int rep = 0; rep < 20; ++rep) {
      const StaticParams p = test::random_params(n, 0, rng);
      const Vector s = random_spins(n, rng);
      const Vector g = effective_fields(s, Vector(0), p);
      const double beta = u(rng);
      double total = 0.0;
      for (Index c = 0; c < outcomes.cols(); ++c) total += std::exp(transition_loglik(outcomes.col(c), g, beta));
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("DyNoKIM score equals the derivative in log beta") {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const Index n = 2 + rep % 8;
    const StaticParams p = test::random_params(n, 0, rng);
    const Vector g = effective_fields(random_spins(n, rng), Vector(0), p);
    const Vector s_next = random_spins(n, rng);
    const Vector f = Vector::Constant(1, test::gaussian_vector(1, rng, 0.5)(0));
    auto ll = [&](const Vector& x) { return transition_loglik(s_next, g, std::exp(x(0))); };
    const double fd = test::central_difference(ll, f, 0);
    CHECK(close(score_dynokim(s_next, g, std::exp(f(0))), fd, 1e-5, 1e-8));
  }
}

TEST_CASE("DyNoKIM Fisher information equals the variance of the score") {
  Rng rng(13);
  for (Index n = 1; n <= 4; ++n) {
    const Matrix outcomes = test::all_configurations(n);
    const StaticParams p = test::random_params(n, 0, rng);
    const Vector g = effective_fields(random_spins(n, rng), Vector(0), p);
    const double beta = 0.8;
    double mean = 0.0, second = 0.0;
    for (Index c = 0; c < outcomes.cols(); ++c) {
      const double prob = std::exp(transition_loglik(outcomes.col(c), g, beta));
      const double sc = score_dynokim(outcomes.col(c), g, beta);
      mean += prob * sc;
      second += prob * sc * sc;
    }
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(second == doctest::Approx(fisher_dynokim(g, beta)).epsilon(1e-10));
  }
}

TEST_CASE("DyEKIM score components match finite differences in link space") {
  Rng rng(17);
  for (int rep = 0; rep < 40; ++rep) {
    const Index n = 2 + rep % 6;
    const Index k = rep % 3;
    const StaticParams p = test::random_params(n, k, rng);
    const Vector s = random_spins(n, rng);
    const Vector x = test::gaussian_vector(k, rng);
    const Vector s_next = random_spins(n, rng);
    const Vector f = test::gaussian_vector(4 + k, rng, 0.3);
    auto ll = [&](const Vector& link) {
      const EkimFactorState st = EkimFactorState::from_link(link);
      return ekim_loglik(s_next, ekim_fields(s, x, p, st));
    };
    const EkimFactorState st = EkimFactorState::from_link(f);
    const ScoreFisher sf = score_fisher_ekim(s_next, ekim_fields(s, x, p, st), st);
    for (Index m = 0; m < 4 + k; ++m) {
      CHECK(close(sf.score(m), test::central_difference(ll, f, m), 1e-5, 1e-8));
    }
  }
}

TEST_CASE("DyEKIM Fisher diagonal equals the expected squared score") {
  Rng rng(19);
  const Index n = 3, k = 1;
  const Matrix outcomes = test::all_configurations(n);
  const StaticParams p = test::random_params(n, k, rng);
  const Vector s = random_spins(n, rng);
  const Vector x = test::gaussian_vector(k, rng);
  const EkimFactorState st = EkimFactorState::from_link(test::gaussian_vector(4 + k, rng, 0.3));
  const FieldDecomposition d = ekim_fields(s, x, p, st);
  Vector second = Vector::Zero(4 + k);
  for (Index c = 0; c < outcomes.cols(); ++c) {
    const double prob = std::exp(ekim_loglik(outcomes.col(c), d));
    second += prob * score_fisher_ekim(outcomes.col(c), d, st).score.array().square().matrix();
  }
  const Vector fisher = score_fisher_ekim(outcomes.col(0), d, st).fisher;
  for (Index m = 0; m < 4 + k; ++m) CHECK(second(m) == doctest::Approx(fisher(m)).epsilon(1e-10));
}

TEST_CASE("unit DyEKIM factors reproduce the plain fields") {
  Rng rng(23);
  const StaticParams p = test::random_params(5, 2, rng);
  const Vector s = random_spins(5, rng);
  const Vector x = test::gaussian_vector(2, rng);
  const FieldDecomposition d = ekim_fields(s, x, p, EkimFactorState::unit(2));
  CHECK((d.total - effective_fields(s, x, p)).norm() < 1e-13);
  CHECK(ekim_loglik(s, d) == doctest::Approx(transition_loglik(s, d.total, 1.0)));
}

TEST_CASE("invalid beta is rejected") {
  const Vector g = Vector::Ones(2);
  CHECK_THROWS_AS(transition_loglik(g, g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fisher_dynokim(g, -1.0), std::invalid_argument);
}
