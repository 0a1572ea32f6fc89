#include "sdkim/types.hpp"

#include <cmath>
#include <sstream>

namespace sdkim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

std::string to_string(ModelKind kind) {
  return kind == ModelKind::dynokim ? "dynokim" : "dyekim";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "dynokim") return ModelKind::dynokim;
  if (name == "dyekim") return ModelKind::dyekim;
  throw std::invalid_argument("unknown model kind '" + name + "' (expected dynokim or dyekim)");
}

Index factor_count(ModelKind kind, Index covariates) {
  return kind == ModelKind::dynokim ? 1 : 4 + covariates;
}

bool is_log_linked(ModelKind kind, Index covariates, Index m) {
  return kind == ModelKind::dynokim || m < 3 + covariates;
}

std::vector<std::string> factor_names(ModelKind kind, Index covariates) {
  if (kind == ModelKind::dynokim) return {"beta"};
  std::vector<std::string> names{"beta_diag", "beta_off", "beta_h"};
  for (Index k = 0; k < covariates; ++k) names.push_back("beta_k" + std::to_string(k));
  names.emplace_back("h0");
  return names;
}

SpinPath::SpinPath(Matrix values) : values_(std::move(values)) {
  require(values_.rows() >= 2, "SpinPath needs at least two time steps");
  require(values_.cols() >= 1, "SpinPath needs at least one spin");
  for (Index t = 0; t < values_.rows(); ++t) {
    for (Index i = 0; i < values_.cols(); ++i) {
      const double v = values_(t, i);
      if (v != 1.0 && v != -1.0) {
        std::ostringstream os;
        os << "spin value " << v << " at row " << t << ", column " << i << " is not +1 or -1";
        throw std::invalid_argument(os.str());
      }
    }
  }
}

CovariatePath::CovariatePath(Matrix values) : values_(std::move(values)) {
  require(values_.allFinite(), "covariates must be finite");
}

StaticParams StaticParams::zeros(Index spins, Index covariates) {
  return {Matrix::Zero(spins, spins), Vector::Zero(spins), Matrix::Zero(spins, covariates)};
}

void StaticParams::validate() const {
  require(J.rows() == J.cols(), "J must be square");
  require(h.size() == J.rows(), "h length must match J");
  require(b.rows() == J.rows(), "b rows must match J");
  require(J.allFinite() && h.allFinite() && b.allFinite(), "static parameters must be finite");
}

NoiseState NoiseState::from_log(double f) {
  require(std::isfinite(f), "log noise parameter must be finite");
  return {f, std::exp(f)};
}

NoiseState NoiseState::from_beta(double beta) {
  require(beta > 0.0 && std::isfinite(beta), "beta must be positive and finite");
  const double f = std::log(beta);
  return {f, std::exp(f)};
}

EkimFactorState EkimFactorState::unit(Index covariates) {
  EkimFactorState s;
  s.beta_k = Vector::Ones(covariates);
  return s;
}

EkimFactorState EkimFactorState::from_link(const Eigen::Ref<const Vector>& f) {
  require(f.size() >= 4, "DyEKIM link vector needs at least 4 entries");
  EkimFactorState s;
  const Index k = f.size() - 4;
  s.beta_diag = std::exp(f(0));
  s.beta_off = std::exp(f(1));
  s.beta_h = std::exp(f(2));
  s.beta_k = f.segment(3, k).array().exp().matrix();
  s.h0 = f(3 + k);
  return s;
}

Vector EkimFactorState::to_link() const {
  Vector f(4 + beta_k.size());
  f(0) = std::log(beta_diag);
  f(1) = std::log(beta_off);
  f(2) = std::log(beta_h);
  f.segment(3, beta_k.size()) = beta_k.array().log().matrix();
  f(3 + beta_k.size()) = h0;
  return f;
}

Vector EkimFactorState::to_natural() const {
  Vector v(4 + beta_k.size());
  v(0) = beta_diag;
  v(1) = beta_off;
  v(2) = beta_h;
  v.segment(3, beta_k.size()) = beta_k;
  v(3 + beta_k.size()) = h0;
  return v;
}

void EkimFactorState::validate() const {
  require(beta_diag > 0 && beta_off > 0 && beta_h > 0 && (beta_k.array() > 0).all(),
          "DyEKIM beta factors must be strictly positive");
  require(std::isfinite(h0), "h0 must be finite");
}

GasCoefficients GasCoefficients::targeted(const Vector& f_bar, const Vector& B, const Vector& A) {
  require(f_bar.size() == B.size() && B.size() == A.size(), "GAS coefficient sizes differ");
  GasCoefficients g{(Vector::Ones(B.size()) - B).cwiseProduct(f_bar), B, A};
  g.validate();
  return g;
}

Vector GasCoefficients::unconditional_mean() const {
  return w.array() / (1.0 - B.array());
}

void GasCoefficients::validate() const {
  require(w.size() == B.size() && B.size() == A.size(), "GAS coefficient sizes differ");
  require((B.array().abs() < 1.0).all(), "GAS recursion requires |B| < 1");
  require((A.array() >= 0.0).all(), "GAS recursion requires A >= 0");
  require(w.allFinite() && A.allFinite(), "GAS coefficients must be finite");
}

Matrix FactorPath::link_values() const {
  Matrix f = values;
  for (Index m = 0; m < f.cols(); ++m) {
    if (is_log_linked(kind, covariates, m)) f.col(m) = f.col(m).array().log().matrix();
  }
  return f;
}

}  // namespace sdkim
