#pragma once

#include <sdkim/dgp.hpp>
#include <sdkim/types.hpp>

#include <cmath>
#include <functional>
#include <random>

namespace sdkim::test {

/// Central difference of f at x in direction e_k.
inline double central_difference(const std::function<double(const Vector&)>& f, const Vector& x, Index k,
                                 double h = 1e-5) {
  Vector up = x, down = x;
  up(k) += h;
  down(k) -= h;
  return (f(up) - f(down)) / (2.0 * h);
}

inline bool close(double a, double b, double rtol, double atol = 0.0) {
  return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

/// All 2^n spin configurations, one per column.
inline Matrix all_configurations(Index n) {
  const Index count = Index(1) << n;
  Matrix out(n, count);
  for (Index c = 0; c < count; ++c) {
    for (Index i = 0; i < n; ++i) out(i, c) = ((c >> i) & 1) ? 1.0 : -1.0;
  }
  return out;
}

inline StaticParams random_params(Index n, Index k, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> z(0.0, 1.0);
  StaticParams p = StaticParams::zeros(n, k);
  for (Index i = 0; i < n; ++i) {
    p.h(i) = 0.5 * scale * z(rng);
    for (Index j = 0; j < n; ++j) p.J(i, j) = scale * z(rng) / std::sqrt(static_cast<double>(n));
    for (Index c = 0; c < k; ++c) p.b(i, c) = 0.5 * scale * z(rng);
  }
  return p;
}

inline Vector gaussian_vector(Index n, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> z(0.0, sd);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = z(rng);
  return v;
}

}  // namespace sdkim::test
