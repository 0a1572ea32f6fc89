#include "sdkim/field_cache.hpp"

#include <cmath>
#include <stdexcept>

namespace sdkim {

namespace {

// tanh(g) and log(2 cosh g) sharing one exponential.
inline void tanh_log2cosh(double g, double& tau, double& l2c) {
  const double a = std::abs(g);
  const double e = std::exp(-2.0 * a);
  const double t = (1.0 - e) / (1.0 + e);
  tau = g < 0.0 ? -t : t;
  l2c = a + std::log1p(e);
}

}  // namespace

FieldCache::FieldCache(ModelKind kind, const SpinPath& spins, const CovariatePath& covariates,
                       const StaticParams& params)
    : kind_(kind), covariates_(covariates.count()) {
  params.validate();
  if (params.spins() != spins.spins()) throw std::invalid_argument("FieldCache: J does not match spin count");
  if (covariates.length() != spins.length()) {
    throw std::invalid_argument("FieldCache: covariate length differs from spin length");
  }
  if (params.covariates() != covariates_) {
    throw std::invalid_argument("FieldCache: b does not match covariate count");
  }
  const Index steps = spins.transitions();
  const auto current = spins.values().topRows(steps);
  next_ = spins.values().bottomRows(steps);
  const Matrix x = covariates.values().topRows(steps);

  const RowMatrix coupled = current * params.J.transpose();
  if (kind_ == ModelKind::dynokim) {
    raw_ = coupled;
    raw_.rowwise() += params.h.transpose();
    if (covariates_ > 0) raw_ += x * params.b.transpose();
  } else {
    diag_ = current.array().rowwise() * params.J.diagonal().transpose().array();
    raw_ = coupled - diag_;
    h_ = params.h;
    cov_.reserve(static_cast<std::size_t>(covariates_));
    for (Index k = 0; k < covariates_; ++k) {
      cov_.emplace_back(x.col(k) * params.b.col(k).transpose());
    }
  }
}

StepStats FieldCache::make_stats() const {
  const Index m = factors();
  StepStats s;
  s.score = Vector::Zero(m);
  s.fisher = Vector::Zero(m);
  s.dscore = Matrix::Zero(m, m);
  s.dfisher = Matrix::Zero(m, m);
  s.info = Matrix::Zero(m, m);
  s.c = Vector::Zero(m);
  s.scale = Vector::Zero(m);
  return s;
}

Vector FieldCache::base_fields(Index t) const {
  if (kind_ == ModelKind::dynokim) return raw_.row(t).transpose();
  Vector g = raw_.row(t).transpose() + diag_.row(t).transpose() + h_;
  for (const auto& c : cov_) g += c.row(t).transpose();
  return g;
}

Vector FieldCache::total_fields(Index t, const VecRef& f) const {
  if (kind_ == ModelKind::dynokim) return std::exp(f(0)) * raw_.row(t).transpose();
  const auto state = EkimFactorState::from_link(f);
  Vector g = state.beta_diag * diag_.row(t).transpose() + state.beta_off * raw_.row(t).transpose() +
             state.beta_h * (h_.array() + state.h0).matrix();
  for (Index k = 0; k < covariates_; ++k) g += state.beta_k(k) * cov_[k].row(t).transpose();
  return g;
}

void FieldCache::evaluate(Index t, const VecRef& f, StepStats& out, bool derivatives) const {
  const Index m_count = factors();
  const Index n = spins();
  if (f.size() != m_count) throw std::invalid_argument("FieldCache::evaluate: factor vector size");

  out.loglik = 0.0;
  out.score.setZero();
  out.fisher.setZero();
  if (derivatives) {
    out.dscore.setZero();
    out.dfisher.setZero();
    out.info.setZero();
  }
  double* c = out.c.data();
  double* scale = out.scale.data();
  const bool ekim = kind_ == ModelKind::dyekim;
  const Index h_idx = 2;
  const Index h0_idx = m_count - 1;
  double h0 = 0.0;
  for (Index m = 0; m < m_count; ++m) {
    if (ekim && m == h0_idx) {
      h0 = f(m);
      scale[m] = 0.0;
    } else {
      scale[m] = std::exp(f(m));
    }
  }

  const double* next_row = next_.row(t).data();
  const double* raw_row = raw_.row(t).data();
  const double* diag_row = ekim ? diag_.row(t).data() : nullptr;

  for (Index i = 0; i < n; ++i) {
    double g;
    if (!ekim) {
      c[0] = scale[0] * raw_row[i];
      g = c[0];
    } else {
      c[0] = scale[0] * diag_row[i];
      c[1] = scale[1] * raw_row[i];
      c[2] = scale[2] * (h_(i) + h0);
      g = c[0] + c[1] + c[2];
      for (Index k = 0; k < covariates_; ++k) {
        c[3 + k] = scale[3 + k] * cov_[k](t, i);
        g += c[3 + k];
      }
      c[h0_idx] = scale[h_idx];
    }
    const double s = next_row[i];
    double tau, l2c;
    tanh_log2cosh(g, tau, l2c);
    const double resid = s - tau;
    const double curv = 1.0 - tau * tau;
    out.loglik += s * g - l2c;
    for (Index m = 0; m < m_count; ++m) {
      out.score(m) += resid * c[m];
      out.fisher(m) += curv * c[m] * c[m];
    }
    if (!derivatives) continue;
    for (Index m = 0; m < m_count; ++m) {
      const double cm = c[m];
      for (Index k = 0; k < m_count; ++k) {
        const double cross = curv * cm * c[k];
        out.info(m, k) += cross;
        out.dscore(m, k) -= cross;
        out.dfisher(m, k) -= 2.0 * tau * cross * cm;
      }
    }
    // d c_m / d f_m = c_m for log-linked factors
    for (Index m = 0; m < m_count; ++m) {
      if (ekim && m == h0_idx) continue;
      out.dscore(m, m) += resid * c[m];
      out.dfisher(m, m) += 2.0 * curv * c[m] * c[m];
    }
    if (ekim) {
      // c_h = beta_h (h_i + h0) and c_h0 = beta_h couple the two factors
      const double beta_h = scale[h_idx];
      out.dscore(h_idx, h0_idx) += resid * beta_h;
      out.dfisher(h_idx, h0_idx) += 2.0 * curv * c[h_idx] * beta_h;
      out.dscore(h0_idx, h_idx) += resid * beta_h;
      out.dfisher(h0_idx, h_idx) += 2.0 * curv * c[h0_idx] * beta_h;
    }
  }
}

}  // namespace sdkim
