#include "sdkim/experiments.hpp"

#include "sdkim/diagnostics.hpp"
#include "sdkim/filter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sdkim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::int64_t as_int(Index i) { return static_cast<std::int64_t>(i); }

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::consistency: return "consistency";
    case ExperimentKind::misspec_sine: return "misspec_sine";
    case ExperimentKind::misspec_step: return "misspec_step";
    case ExperimentKind::misspec_ar1: return "misspec_ar1";
    case ExperimentKind::dyekim_separation: return "dyekim_separation";
    case ExperimentKind::auc_vs_beta: return "auc_vs_beta";
    case ExperimentKind::lm_size_power: return "lm_size_power";
  }
  return "unknown";
}

std::vector<std::string> experiment_kind_names() {
  return {"consistency", "misspec_sine", "misspec_step", "misspec_ar1", "dyekim_separation", "auc_vs_beta",
          "lm_size_power"};
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::consistency, ExperimentKind::misspec_sine, ExperimentKind::misspec_step,
                 ExperimentKind::misspec_ar1, ExperimentKind::dyekim_separation, ExperimentKind::auc_vs_beta,
                 ExperimentKind::lm_size_power}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown experiment kind: " + name);
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::consistency:
      c.spins = 50;
      c.lengths = {750, 1500};
      c.replications = 20;
      break;
    case ExperimentKind::misspec_sine:
      c.spins = 30;
      c.length = 3000;
      c.replications = 20;
      c.beta_path.kind = BetaPathKind::sinusoid;
      break;
    case ExperimentKind::misspec_step:
      c.spins = 30;
      c.length = 3000;
      c.replications = 30;
      c.beta_path.kind = BetaPathKind::double_step;
      break;
    case ExperimentKind::misspec_ar1:
      c.spins = 30;
      c.length = 3000;
      c.replications = 30;
      c.beta_path.kind = BetaPathKind::ar1;
      break;
    case ExperimentKind::dyekim_separation:
      c.spins = 30;
      c.length = 1500;
      c.replications = 30;
      c.hyper.h1 = 1.0;
      c.beta_path.kind = BetaPathKind::double_step;
      break;
    case ExperimentKind::auc_vs_beta:
      c.spins = 100;
      c.length = 2000;
      c.replications = 10;
      c.hyper.h0 = 0.2;
      c.hyper.h1 = 0.2;
      c.keep_paths = false;
      break;
    case ExperimentKind::lm_size_power:
      c.spins = 50;
      c.length = 1500;
      c.replications = 50;
      c.size_replications = 200;
      c.keep_paths = false;
      break;
  }
  return c;
}

void ExperimentConfig::use_full_protocol() {
  switch (kind) {
    case ExperimentKind::consistency: replications = 250; break;
    case ExperimentKind::misspec_sine: replications = 60; break;
    case ExperimentKind::misspec_step:
    case ExperimentKind::misspec_ar1:
    case ExperimentKind::dyekim_separation: replications = 30; break;
    case ExperimentKind::auc_vs_beta: replications = 10; break;
    case ExperimentKind::lm_size_power: break;
  }
}

void ExperimentConfig::validate() const {
  if (replications < 1) throw std::invalid_argument("ExperimentConfig: replication count must be at least 1");
  if (kind == ExperimentKind::lm_size_power && size_replications < 1) {
    throw std::invalid_argument("ExperimentConfig: size replication count must be at least 1");
  }
  if (spins < 1) throw std::invalid_argument("ExperimentConfig: need at least one spin");
  if (length < 3) throw std::invalid_argument("ExperimentConfig: length must be at least 3");
  for (Index l : lengths) {
    if (l < 3) throw std::invalid_argument("ExperimentConfig: every length must be at least 3");
  }
  if (threads < 0) throw std::invalid_argument("ExperimentConfig: threads must be nonnegative");
  ParamHyperSpec h = hyper;
  h.spins = spins;
  h.validate();
  if (!(std::abs(gas_B) < 1.0) || !(gas_A >= 0.0)) throw std::invalid_argument("ExperimentConfig: need |B| < 1, A >= 0");
  if (kind == ExperimentKind::misspec_sine) {
    if (amplitudes.empty()) throw std::invalid_argument("ExperimentConfig: empty amplitude list");
    for (double a : amplitudes) {
      if (!(a >= 0.0 && a < 1.0)) throw std::invalid_argument("ExperimentConfig: sinusoid amplitude must lie in [0, 1)");
    }
  }
  if (kind == ExperimentKind::auc_vs_beta) {
    if (betas.empty()) throw std::invalid_argument("ExperimentConfig: empty beta grid");
    for (double b : betas) {
      if (!(b > 0.0)) throw std::invalid_argument("ExperimentConfig: beta grid must be positive");
    }
    if (hyper.J0 * *std::min_element(betas.begin(), betas.end()) >= 1.0) {
      throw std::invalid_argument("ExperimentConfig: every beta in the grid is in the ferromagnetic regime");
    }
  }
  if (kind != ExperimentKind::consistency && kind != ExperimentKind::lm_size_power &&
      kind != ExperimentKind::auc_vs_beta) {
    BetaPathSpec s = beta_path;
    s.validate();
  }
}

void parallel_for(Index count, int threads, const std::function<void(Index)>& task) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<Index>(workers, count));
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

LinearFit regress(const Vector& x, const Vector& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("regress: need two equal-length series");
  const double mx = x.mean(), my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  const double syy = (y.array() - my).square().sum();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  LinearFit f;
  if (!(sxx > 0.0)) throw std::invalid_argument("regress: regressor is constant");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

LinearFit coupling_regression(const Matrix& J_true, const Matrix& J_est) {
  if (J_true.rows() != J_est.rows() || J_true.cols() != J_est.cols()) {
    throw std::invalid_argument("coupling_regression: shape mismatch");
  }
  return regress(Eigen::Map<const Vector>(J_true.data(), J_true.size()),
                 Eigen::Map<const Vector>(J_est.data(), J_est.size()));
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("pearson: need two equal-length series");
  const Vector da = a.array() - a.mean(), db = b.array() - b.mean();
  const double sa = da.squaredNorm(), sb = db.squaredNorm();
  // relative threshold: a path constant up to rounding has no defined correlation
  if (sa <= 1e-24 * std::max(1.0, a.squaredNorm()) || sb <= 1e-24 * std::max(1.0, b.squaredNorm())) return kNaN;
  return da.dot(db) / std::sqrt(sa * sb);
}

double rmse(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() == 0) throw std::invalid_argument("rmse: need two equal-length series");
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

double quantile(std::vector<double> v, double q) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double simulated_auc(const StaticParams& params, double beta, const SpinPath& spins) {
  const Index n = params.spins();
  const Index steps = spins.transitions();
  std::vector<double> prob, outcome;
  prob.reserve(static_cast<std::size_t>(n * steps));
  outcome.reserve(static_cast<std::size_t>(n * steps));
  const Matrix& s = spins.values();
  Vector g(n);
  for (Index t = 0; t < steps; ++t) {
    g.noalias() = params.J * s.row(t).transpose();
    g += params.h;
    for (Index i = 0; i < n; ++i) {
      prob.push_back(p_plus(beta, g(i)));
      outcome.push_back(s(t + 1, i));
    }
  }
  return empirical_auc(prob, outcome).auc;
}

namespace {

ParamHyperSpec hyper_of(const ExperimentConfig& c) {
  ParamHyperSpec h = c.hyper;
  h.spins = c.spins;
  return h;
}

std::string failure_message(const std::string& what, Index rep, const std::exception& e) {
  std::ostringstream os;
  os << what << " replication " << rep << ": " << e.what();
  return os.str();
}

}  // namespace

ExperimentResult run_consistency(const ExperimentConfig& config) {
  config.validate();
  const std::vector<Index> lengths = config.lengths.empty() ? std::vector<Index>{config.length} : config.lengths;
  const Index reps = config.replications;
  const Index total = reps * static_cast<Index>(lengths.size());

  struct Row {
    bool ok = false;
    std::string message;
    LinearFit fit;
    double B = kNaN, A = kNaN, w = kNaN, f_bar = kNaN, loglik = kNaN;
    bool converged = false, boundary = false;
  };
  std::vector<Row> rows(static_cast<std::size_t>(total));
  const GasCoefficients gas = GasCoefficients::targeted(Vector::Constant(1, config.f_bar),
                                                        Vector::Constant(1, config.gas_B),
                                                        Vector::Constant(1, config.gas_A));
  parallel_for(total, config.threads, [&](Index i) {
    Row& row = rows[static_cast<std::size_t>(i)];
    const Index T = lengths[static_cast<std::size_t>(i / reps)];
    try {
      Rng rng = replication_rng(config.seed, static_cast<std::uint64_t>(i));
      const StaticParams params = sample_static_params(hyper_of(config), rng);
      const auto sim = simulate_score_driven(ModelKind::dynokim, params, gas, T, rng);
      const FitReport rep = fit_dynokim(sim.first, config.fit);
      row.fit = coupling_regression(params.J, rep.params.J);
      row.B = rep.gas.B(0);
      row.A = rep.gas.A(0);
      row.w = rep.gas.w(0);
      row.f_bar = rep.f_bar(0);
      row.loglik = rep.loglik;
      row.converged = rep.converged;
      row.boundary = rep.boundary;
      row.ok = true;
    } catch (const std::exception& e) {
      row.message = failure_message("consistency", i, e);
    }
  });

  ExperimentResult out;
  Table& table = out.tables["replications"];
  table.columns = {"length", "replication", "seed", "status", "slope", "intercept", "r2",
                   "B", "A", "w", "f_bar", "loglik", "converged", "boundary"};
  for (Index i = 0; i < total; ++i) {
    const Row& r = rows[static_cast<std::size_t>(i)];
    if (!r.ok) {
      ++out.failures;
      out.messages.push_back(r.message);
    }
    table.add_row({as_int(lengths[static_cast<std::size_t>(i / reps)]), as_int(i % reps),
                   static_cast<std::int64_t>(replication_seed(config.seed, static_cast<std::uint64_t>(i))),
                   std::string(r.ok ? "ok" : "failed"), r.ok ? r.fit.slope : kNaN, r.ok ? r.fit.intercept : kNaN,
                   r.ok ? r.fit.r2 : kNaN, r.B, r.A, r.w, r.f_bar, r.loglik,
                   as_int(r.converged ? 1 : 0), as_int(r.boundary ? 1 : 0)});
  }

  Table& summary = out.tables["summary"];
  summary.columns = {"length", "used", "failed", "median_slope", "median_abs_slope_error", "median_r2",
                     "median_B", "median_abs_B_error", "median_A", "q10_B", "q90_B"};
  for (std::size_t l = 0; l < lengths.size(); ++l) {
    std::vector<double> slope, slope_err, r2, B, B_err, A;
    Index failed = 0;
    for (Index r = 0; r < reps; ++r) {
      const Row& row = rows[static_cast<std::size_t>(static_cast<Index>(l) * reps + r)];
      if (!row.ok) {
        ++failed;
        continue;
      }
      slope.push_back(row.fit.slope);
      slope_err.push_back(std::abs(row.fit.slope - 1.0));
      r2.push_back(row.fit.r2);
      B.push_back(row.B);
      B_err.push_back(std::abs(row.B - config.gas_B));
      A.push_back(row.A);
    }
    summary.add_row({as_int(lengths[l]), as_int(reps - failed), as_int(failed), median(slope), median(slope_err),
                     median(r2), median(B), median(B_err), median(A), quantile(B, 0.1), quantile(B, 0.9)});
  }
  return out;
}

ExperimentResult run_misspec(const ExperimentConfig& config) {
  config.validate();
  const bool sine = config.kind == ExperimentKind::misspec_sine;
  const std::vector<double> amplitudes = sine ? config.amplitudes : std::vector<double>{config.beta_path.amplitude};
  const Index reps = config.replications;
  const Index total = reps * static_cast<Index>(amplitudes.size());
  const Index T = config.length;

  struct Row {
    bool ok = false;
    std::string message;
    LinearFit static_fit, dynamic_fit;
    double rmse_filtered = kNaN, rmse_constant = kNaN, B = kNaN, A = kNaN;
    Index floored = 0;
    Vector truth, filtered;
  };
  std::vector<Row> rows(static_cast<std::size_t>(total));
  parallel_for(total, config.threads, [&](Index i) {
    Row& row = rows[static_cast<std::size_t>(i)];
    try {
      Rng rng = replication_rng(config.seed, static_cast<std::uint64_t>(i));
      const StaticParams params = sample_static_params(hyper_of(config), rng);
      BetaPathSpec spec = config.beta_path;
      if (sine) spec.amplitude = amplitudes[static_cast<std::size_t>(i / reps)];
      const GeneratedPath beta = make_beta_path(spec, T - 1, rng);
      const SpinPath spins = simulate_path(params, beta.values, rng);
      const CovariatePath none = CovariatePath::none(T);
      const StaticFit stat = fit_static(spins, none, config.fit);
      const FitReport rep = fit_dynokim(spins, config.fit);
      row.static_fit = coupling_regression(params.J, stat.params.J);
      row.dynamic_fit = coupling_regression(params.J, rep.params.J);
      row.filtered = rep.path.values.col(0);
      row.truth = beta.values;
      row.rmse_filtered = rmse(row.filtered, row.truth);
      row.rmse_constant = rmse(Vector::Ones(T - 1), row.truth);
      row.B = rep.gas.B(0);
      row.A = rep.gas.A(0);
      row.floored = beta.floored;
      row.ok = true;
    } catch (const std::exception& e) {
      row.message = failure_message(to_string(config.kind), i, e);
    }
  });

  ExperimentResult out;
  Table& table = out.tables["replications"];
  table.columns = {"amplitude", "replication", "status", "static_slope", "static_r2", "dynamic_slope",
                   "dynamic_r2", "rmse_filtered", "rmse_constant", "B", "A", "floored"};
  Table& paths = out.tables["paths"];
  paths.columns = {"amplitude", "replication", "t", "beta_true", "beta_filtered"};
  for (Index i = 0; i < total; ++i) {
    const Row& r = rows[static_cast<std::size_t>(i)];
    const double amp = amplitudes[static_cast<std::size_t>(i / reps)];
    if (!r.ok) {
      ++out.failures;
      out.messages.push_back(r.message);
    }
    table.add_row({amp, as_int(i % reps), std::string(r.ok ? "ok" : "failed"), r.ok ? r.static_fit.slope : kNaN,
                   r.ok ? r.static_fit.r2 : kNaN, r.ok ? r.dynamic_fit.slope : kNaN, r.ok ? r.dynamic_fit.r2 : kNaN,
                   r.rmse_filtered, r.rmse_constant, r.B, r.A, as_int(r.floored)});
    if (config.keep_paths && r.ok) {
      for (Index t = 0; t < r.truth.size(); ++t) {
        paths.add_row({amp, as_int(i % reps), as_int(t), r.truth(t), r.filtered(t)});
      }
    }
  }
  if (!config.keep_paths) out.tables.erase("paths");

  Table& summary = out.tables["summary"];
  summary.columns = {"amplitude", "used", "failed", "mean_static_slope", "mean_dynamic_slope",
                     "mean_rmse_filtered", "mean_rmse_constant", "share_filter_better"};
  for (std::size_t a = 0; a < amplitudes.size(); ++a) {
    double s_static = 0.0, s_dyn = 0.0, e_f = 0.0, e_c = 0.0, better = 0.0;
    Index used = 0;
    for (Index r = 0; r < reps; ++r) {
      const Row& row = rows[static_cast<std::size_t>(static_cast<Index>(a) * reps + r)];
      if (!row.ok) continue;
      ++used;
      s_static += row.static_fit.slope;
      s_dyn += row.dynamic_fit.slope;
      e_f += row.rmse_filtered;
      e_c += row.rmse_constant;
      better += row.rmse_filtered < row.rmse_constant ? 1.0 : 0.0;
    }
    const double u = used > 0 ? static_cast<double>(used) : kNaN;
    summary.add_row({amplitudes[a], as_int(used), as_int(reps - used), s_static / u, s_dyn / u, e_f / u, e_c / u,
                     better / u});
  }
  return out;
}

ExperimentResult run_dyekim_separation(const ExperimentConfig& config) {
  config.validate();
  const Index reps = config.replications;
  const Index T = config.length;
  const Index steps = T - 1;
  static const char* kNames[3] = {"diag", "off", "h"};

  struct Row {
    bool ok = false;
    std::string message;
    Matrix corr = Matrix::Constant(3, 3, kNaN);  // (filtered m, true n)
    Vector variance = Vector::Constant(4, kNaN);
    Matrix truth, filtered;
  };
  std::vector<Row> rows(static_cast<std::size_t>(reps));
  parallel_for(reps, config.threads, [&](Index i) {
    Row& row = rows[static_cast<std::size_t>(i)];
    try {
      Rng rng = replication_rng(config.seed, static_cast<std::uint64_t>(i));
      const StaticParams params = sample_static_params(hyper_of(config), rng);
      row.truth = Matrix::Ones(steps, 3);
      if (!config.constant_factors) {
        BetaPathSpec off = config.beta_path;
        row.truth.col(1) = make_beta_path(off, steps, rng).values;
        BetaPathSpec h;
        h.kind = BetaPathKind::exp_sinusoid;
        h.cycles = config.dyekim_cycles;
        row.truth.col(2) = make_beta_path(h, steps, rng).values;
      }
      std::vector<EkimFactorState> factors(static_cast<std::size_t>(steps), EkimFactorState::unit(0));
      for (Index t = 0; t < steps; ++t) {
        auto& f = factors[static_cast<std::size_t>(t)];
        f.beta_diag = row.truth(t, 0);
        f.beta_off = row.truth(t, 1);
        f.beta_h = row.truth(t, 2);
      }
      const SpinPath spins = simulate_path(params, factors, rng);
      const FitReport rep = fit_dyekim(spins, CovariatePath::none(T), config.fit);
      row.filtered = rep.path.values;
      for (Index m = 0; m < 3; ++m) {
        for (Index n = 0; n < 3; ++n) row.corr(m, n) = pearson(row.filtered.col(m), row.truth.col(n));
      }
      for (Index m = 0; m < 4; ++m) {
        const Vector c = row.filtered.col(m).array() - row.filtered.col(m).mean();
        row.variance(m) = c.squaredNorm() / static_cast<double>(steps - 1);
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.message = failure_message("dyekim_separation", i, e);
    }
  });

  ExperimentResult out;
  Table& table = out.tables["replications"];
  table.columns = {"replication", "status"};
  for (int m = 0; m < 3; ++m) {
    for (int n = 0; n < 3; ++n) table.columns.push_back(std::string("corr_") + kNames[m] + "_" + kNames[n]);
  }
  for (const char* n : {"var_diag", "var_off", "var_h", "var_h0", "off_separated", "h_separated", "diag_quieter"}) {
    table.columns.emplace_back(n);
  }
  Table& paths = out.tables["paths"];
  paths.columns = {"replication", "t", "true_diag", "true_off", "true_h", "beta_diag", "beta_off", "beta_h", "h0"};
  for (Index i = 0; i < reps; ++i) {
    const Row& r = rows[static_cast<std::size_t>(i)];
    if (!r.ok) {
      ++out.failures;
      out.messages.push_back(r.message);
    }
    std::vector<Cell> cells{as_int(i), std::string(r.ok ? "ok" : "failed")};
    for (Index m = 0; m < 3; ++m) {
      for (Index n = 0; n < 3; ++n) cells.emplace_back(r.corr(m, n));
    }
    for (Index m = 0; m < 4; ++m) cells.emplace_back(r.variance(m));
    // NaN correlations (constant truth) never count as separated
    cells.emplace_back(as_int(r.ok && r.corr(1, 1) > r.corr(1, 2) ? 1 : 0));
    cells.emplace_back(as_int(r.ok && r.corr(2, 2) > r.corr(2, 1) ? 1 : 0));
    cells.emplace_back(as_int(r.ok && r.variance(0) < r.variance(2) ? 1 : 0));
    table.add_row(std::move(cells));
    if (config.keep_paths && r.ok) {
      for (Index t = 0; t < steps; ++t) {
        paths.add_row({as_int(i), as_int(t), r.truth(t, 0), r.truth(t, 1), r.truth(t, 2), r.filtered(t, 0),
                       r.filtered(t, 1), r.filtered(t, 2), r.filtered(t, 3)});
      }
    }
  }
  if (!config.keep_paths) out.tables.erase("paths");

  Table& summary = out.tables["summary"];
  summary.columns = {"used", "failed", "share_off_separated", "share_h_separated", "share_diag_quieter",
                     "median_corr_h_h", "median_corr_off_off"};
  std::vector<double> chh, coo;
  double off_sep = 0.0, h_sep = 0.0, quiet = 0.0;
  Index used = 0;
  for (const Row& r : rows) {
    if (!r.ok) continue;
    ++used;
    chh.push_back(r.corr(2, 2));
    coo.push_back(r.corr(1, 1));
    off_sep += r.corr(1, 1) > r.corr(1, 2) ? 1.0 : 0.0;
    h_sep += r.corr(2, 2) > r.corr(2, 1) ? 1.0 : 0.0;
    quiet += r.variance(0) < r.variance(2) ? 1.0 : 0.0;
  }
  const double u = used > 0 ? static_cast<double>(used) : kNaN;
  summary.add_row({as_int(used), as_int(reps - used), off_sep / u, h_sep / u, quiet / u, median(chh), median(coo)});
  return out;
}

ExperimentResult run_auc_vs_beta(const ExperimentConfig& config) {
  config.validate();
  const Index reps = config.replications;
  const Index points = static_cast<Index>(config.betas.size());
  const Index total = reps * points;
  const ParamHyperSpec hyper = hyper_of(config);

  std::vector<double> aucs(static_cast<std::size_t>(total), kNaN);
  std::vector<std::string> errors(static_cast<std::size_t>(total));
  parallel_for(total, config.threads, [&](Index i) {
    const double beta = config.betas[static_cast<std::size_t>(i / reps)];
    try {
      Rng rng = replication_rng(config.seed, static_cast<std::uint64_t>(i));
      const StaticParams params = sample_static_params(hyper, rng);
      const SpinPath spins = simulate_path(params, Vector::Constant(config.length - 1, beta), rng);
      aucs[static_cast<std::size_t>(i)] = simulated_auc(params, beta, spins);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = failure_message("auc_vs_beta", i, e);
    }
  });

  ExperimentResult out;
  Table& table = out.tables["replications"];
  table.columns = {"beta", "replication", "auc"};
  for (Index i = 0; i < total; ++i) {
    if (!errors[static_cast<std::size_t>(i)].empty()) {
      ++out.failures;
      out.messages.push_back(errors[static_cast<std::size_t>(i)]);
    }
    table.add_row({config.betas[static_cast<std::size_t>(i / reps)], as_int(i % reps), aucs[static_cast<std::size_t>(i)]});
  }
  Table& summary = out.tables["summary"];
  summary.columns = {"beta", "used", "simulated_mean", "simulated_sd", "theoretical", "g0", "g1", "paramagnetic"};
  for (Index p = 0; p < points; ++p) {
    const double beta = config.betas[static_cast<std::size_t>(p)];
    std::vector<double> v;
    for (Index r = 0; r < reps; ++r) {
      const double a = aucs[static_cast<std::size_t>(p * reps + r)];
      if (!std::isnan(a)) v.push_back(a);
    }
    double mean = kNaN, sd = kNaN;
    if (!v.empty()) {
      mean = 0.0;
      for (double a : v) mean += a;
      mean /= static_cast<double>(v.size());
      if (v.size() > 1) {
        double ss = 0.0;
        for (double a : v) ss += (a - mean) * (a - mean);
        sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
      }
    }
    double theory = kNaN, g0 = kNaN, g1 = kNaN;
    const bool para = beta * hyper.J0 < 1.0;
    if (para) {
      const FieldMoments fm = gaussian_field_moments(hyper, beta);
      g0 = fm.g0;
      g1 = fm.g1;
      theory = theoretical_auc(beta, FieldDistribution::gaussian(fm.g0, fm.g1));
    }
    summary.add_row({beta, as_int(static_cast<Index>(v.size())), mean, sd, theory, g0, g1, as_int(para ? 1 : 0)});
  }
  return out;
}

ExperimentResult run_lm_size_power(const ExperimentConfig& config) {
  config.validate();
  const Index size_reps = config.size_replications;
  const Index power_reps = config.replications;
  const Index total = size_reps + power_reps;
  const Index T = config.length;
  const GasCoefficients gas = GasCoefficients::targeted(Vector::Constant(1, config.f_bar),
                                                        Vector::Constant(1, config.gas_B),
                                                        Vector::Constant(1, config.gas_A));
  std::vector<LmTestResult> results(static_cast<std::size_t>(total));
  std::vector<std::string> errors(static_cast<std::size_t>(total));
  parallel_for(total, config.threads, [&](Index i) {
    try {
      Rng rng = replication_rng(config.seed, static_cast<std::uint64_t>(i));
      const StaticParams params = sample_static_params(hyper_of(config), rng);
      SpinPath spins;
      if (i < size_reps) {
        spins = simulate_path(params, Vector::Constant(T - 1, std::exp(config.f_bar)), rng);
      } else {
        spins = simulate_score_driven(ModelKind::dynokim, params, gas, T, rng).first;
      }
      const CovariatePath none = CovariatePath::none(T);
      const StaticFit stat = fit_static(spins, none, config.fit);
      results[static_cast<std::size_t>(i)] =
          lm_test(ModelKind::dynokim, spins, none, stat.params, 0, LmNull::fully_static);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = failure_message("lm_size_power", i, e);
      results[static_cast<std::size_t>(i)].defined = false;
      results[static_cast<std::size_t>(i)].statistic = kNaN;
      results[static_cast<std::size_t>(i)].p_value = kNaN;
    }
  });

  ExperimentResult out;
  Table& table = out.tables["replications"];
  table.columns = {"scenario", "replication", "statistic", "p_value", "defined"};
  for (Index i = 0; i < total; ++i) {
    const auto& r = results[static_cast<std::size_t>(i)];
    if (!errors[static_cast<std::size_t>(i)].empty()) {
      ++out.failures;
      out.messages.push_back(errors[static_cast<std::size_t>(i)]);
    }
    const bool size = i < size_reps;
    table.add_row({std::string(size ? "size" : "power"), as_int(size ? i : i - size_reps), r.statistic, r.p_value,
                   as_int(r.defined ? 1 : 0)});
  }
  Table& summary = out.tables["summary"];
  summary.columns = {"scenario", "used", "reject_at_0.05", "reject_at_0.001"};
  for (int s = 0; s < 2; ++s) {
    const Index a = s == 0 ? 0 : size_reps, b = s == 0 ? size_reps : total;
    double r05 = 0.0, r001 = 0.0;
    Index used = 0;
    for (Index i = a; i < b; ++i) {
      const auto& r = results[static_cast<std::size_t>(i)];
      if (!r.defined) continue;
      ++used;
      r05 += r.p_value < 0.05 ? 1.0 : 0.0;
      r001 += r.p_value < 0.001 ? 1.0 : 0.0;
    }
    const double u = used > 0 ? static_cast<double>(used) : kNaN;
    summary.add_row({std::string(s == 0 ? "size" : "power"), as_int(used), r05 / u, r001 / u});
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::consistency: return run_consistency(config);
    case ExperimentKind::misspec_sine:
    case ExperimentKind::misspec_step:
    case ExperimentKind::misspec_ar1: return run_misspec(config);
    case ExperimentKind::dyekim_separation: return run_dyekim_separation(config);
    case ExperimentKind::auc_vs_beta: return run_auc_vs_beta(config);
    case ExperimentKind::lm_size_power: return run_lm_size_power(config);
  }
  throw std::invalid_argument("run_experiment: unknown kind");
}

}  // namespace sdkim
