#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace sdkim {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when an iterative routine does not converge or a recursion produces
/// a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind {
  dynokim,  ///< single time-varying inverse temperature beta(t)
  dyekim,   ///< factorized (beta_diag, beta_off, beta_h, beta_k..., h0)
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Number of time-varying factors: 1 for DyNoKIM, 4 + K for DyEKIM.
Index factor_count(ModelKind kind, Index covariates);

/// Factor m uses a log link (beta-type). Only the trailing DyEKIM h0 factor is
/// identity-linked.
bool is_log_linked(ModelKind kind, Index covariates, Index m);

std::vector<std::string> factor_names(ModelKind kind, Index covariates);

/// T x N matrix of +/-1 observations; row t holds s(t).
class SpinPath {
 public:
  SpinPath() = default;
  explicit SpinPath(Matrix values);

  Index length() const { return values_.rows(); }
  Index spins() const { return values_.cols(); }
  Index transitions() const { return values_.rows() - 1; }
  const Matrix& values() const { return values_; }
  Vector at(Index t) const { return values_.row(t).transpose(); }

 private:
  Matrix values_;
};

/// T x K matrix of exogenous covariates. K = 0 is allowed.
class CovariatePath {
 public:
  CovariatePath() = default;
  explicit CovariatePath(Matrix values);
  static CovariatePath none(Index length) { return CovariatePath(Matrix(length, 0)); }

  Index length() const { return values_.rows(); }
  Index count() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  Vector at(Index t) const { return values_.row(t).transpose(); }

 private:
  Matrix values_;
};

/// Static parameters Theta = (J, h, b).
struct StaticParams {
  Matrix J;  ///< N x N couplings, row i acts on spin i
  Vector h;  ///< N biases
  Matrix b;  ///< N x K covariate loadings

  static StaticParams zeros(Index spins, Index covariates = 0);

  Index spins() const { return J.rows(); }
  Index covariates() const { return b.cols(); }

  /// Throws std::invalid_argument on inconsistent shapes or non-finite entries.
  void validate() const;
};

/// Log-linked noise parameter of the DyNoKIM.
class NoiseState {
 public:
  static NoiseState from_log(double f);
  static NoiseState from_beta(double beta);

  double f() const { return f_; }
  double beta() const { return beta_; }

 private:
  NoiseState(double f, double beta) : f_(f), beta_(beta) {}
  double f_;
  double beta_;
};

/// One time slice of the DyEKIM factors in natural units.
struct EkimFactorState {
  double beta_diag = 1.0;
  double beta_off = 1.0;
  double beta_h = 1.0;
  Vector beta_k;  ///< one per covariate
  double h0 = 0.0;

  static EkimFactorState unit(Index covariates);
  /// Link-space vector ordered (log beta_diag, log beta_off, log beta_h, log beta_k..., h0).
  static EkimFactorState from_link(const Eigen::Ref<const Vector>& f);
  Vector to_link() const;
  Vector to_natural() const;
  void validate() const;
};

/// Effective fields split by the factor that scales each term.
struct FieldDecomposition {
  Vector diag;
  Vector off;
  Vector bias;
  Vector cov;        ///< summed over covariates
  Matrix cov_parts;  ///< N x K, column k is beta_k b_ik x_k
  Vector total;
};

/// Score-driven recursion constants f(t+1) = w + B f(t) + A I^{-1/2} score,
/// with diagonal B and A.
struct GasCoefficients {
  Vector w;
  Vector B;
  Vector A;

  static GasCoefficients targeted(const Vector& f_bar, const Vector& B, const Vector& A);

  Index factors() const { return w.size(); }
  /// w / (1 - B), the fixed point of the recursion without score feedback.
  Vector unconditional_mean() const;
  /// Throws std::invalid_argument unless |B| < 1 and A >= 0 componentwise.
  void validate() const;
};

/// Filtered factor trajectory, one row per transition t -> t+1.
struct FactorPath {
  ModelKind kind = ModelKind::dynokim;
  Index covariates = 0;
  Matrix values;  ///< natural units: betas positive, h0 as is
  Matrix score;   ///< w.r.t. the linked factor
  Matrix fisher;
  Vector loglik;

  Index steps() const { return values.rows(); }
  Index factors() const { return values.cols(); }
  double total_loglik() const { return loglik.sum(); }
  /// Values mapped back to link space (log for betas).
  Matrix link_values() const;
};

}  // namespace sdkim
