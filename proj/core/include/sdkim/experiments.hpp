#pragma once

// Simulation studies producing plot-ready tables. Replications run on a
// worker pool; replication r draws from replication_rng(seed, r), so the
// tables do not depend on the thread count.

#include "sdkim/csv_io.hpp"
#include "sdkim/dgp.hpp"
#include "sdkim/estimation.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace sdkim {

enum class ExperimentKind {
  consistency,
  misspec_sine,
  misspec_step,
  misspec_ar1,
  dyekim_separation,
  auc_vs_beta,
  lm_size_power,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);
std::vector<std::string> experiment_kind_names();

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::consistency;
  Index spins = 50;
  Index length = 1500;
  std::vector<Index> lengths;  ///< consistency: one sweep per length; empty uses `length`
  int replications = 20;
  int size_replications = 200;  ///< lm_size_power: static-DGP replications
  std::uint64_t seed = 1;
  std::string output_dir = "results";
  int threads = 0;  ///< 0 = hardware concurrency

  ParamHyperSpec hyper;  ///< spins is taken from `spins`
  // score-driven DGP
  double gas_B = 0.95;
  double gas_A = 0.01;
  double f_bar = 0.0;
  // prescribed beta paths
  BetaPathSpec beta_path;
  std::vector<double> amplitudes{0.0, 0.5};  ///< misspec_sine sweep
  std::vector<double> betas{0.25, 0.5, 1.0, 2.0, 3.0};  ///< auc_vs_beta grid
  double dyekim_cycles = 5.0;  ///< exp-sinusoid beta_h cycles over the sample
  bool constant_factors = false;  ///< dyekim_separation: all true factors equal to 1
  bool keep_paths = true;  ///< emit per-time path tables

  FitOptions fit;

  /// Desk-scale defaults for `kind`.
  static ExperimentConfig defaults(ExperimentKind kind);
  /// Replication counts of the original study (250, 60, 30, ...).
  void use_full_protocol();
  void validate() const;
};

struct ExperimentResult {
  std::map<std::string, Table> tables;  ///< e.g. "replications", "summary", "paths"
  int failures = 0;
  std::vector<std::string> messages;  ///< one line per failed replication
};

ExperimentResult run_experiment(const ExperimentConfig& config);

ExperimentResult run_consistency(const ExperimentConfig& config);
ExperimentResult run_misspec(const ExperimentConfig& config);
ExperimentResult run_dyekim_separation(const ExperimentConfig& config);
ExperimentResult run_auc_vs_beta(const ExperimentConfig& config);
ExperimentResult run_lm_size_power(const ExperimentConfig& config);

/// Calls task(i) for i in [0, count) on `threads` workers (0 = hardware
/// concurrency). The first exception thrown by a task is rethrown.
void parallel_for(Index count, int threads, const std::function<void(Index)>& task);

/// OLS of y on x with intercept.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit regress(const Vector& x, const Vector& y);

/// Slope/intercept/R^2 of vec(J_est) on vec(J_true).
LinearFit coupling_regression(const Matrix& J_true, const Matrix& J_est);

double pearson(const Vector& a, const Vector& b);  ///< NaN if either is constant
double rmse(const Vector& a, const Vector& b);
double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);  ///< linear interpolation

/// Empirical AUC of known-parameter forecasts on a simulated path at constant beta.
double simulated_auc(const StaticParams& params, double beta, const SpinPath& spins);

}  // namespace sdkim
