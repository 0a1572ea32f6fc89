// Command-line front end. Every CSV written here gets a `<file>.meta.json`
// sidecar with the resolved options, the seed and the library version.

#include "json_config.hpp"

#include <sdkim/csv_io.hpp>
#include <sdkim/diagnostics.hpp>
#include <sdkim/dgp.hpp>
#include <sdkim/estimation.hpp>
#include <sdkim/experiments.hpp>
#include <sdkim/filter.hpp>
#include <sdkim/serialize.hpp>
#include <sdkim/timeseries.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace sdkim;

namespace {

struct Output {
  const CLI::App* root = nullptr;
  std::string command;
  std::uint64_t seed = 0;

  std::string resolved() const { return cli::JsonConfig::collect(root, true).dump(); }

  void table(const fs::path& path, const Table& t, std::vector<std::pair<std::string, std::string>> extra = {}) const {
    write_table(path, t);
    extra.emplace_back("rows", std::to_string(t.rows.size()));
    write_text(metadata_path(path), metadata_json(command, resolved(), seed, extra));
    std::cout << "wrote " << path.string() << "\n";
  }

  void matrix(const fs::path& path, const std::vector<std::string>& names, const Matrix& m) const {
    write_matrix(path, names, m);
    write_text(metadata_path(path), metadata_json(command, resolved(), seed, {{"rows", std::to_string(m.rows())}}));
    std::cout << "wrote " << path.string() << "\n";
  }

  void document(const fs::path& path, const std::string& text) const {
    write_text(path, text);
    std::cout << "wrote " << path.string() << "\n";
  }
};

struct DataArgs {
  std::string spins;
  std::string covariates;
  std::string kind = "dynokim";
};

void add_data_args(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--spins", a.spins, "CSV of +/-1 observations, one row per time step")->required();
  cmd->add_option("--covariates", a.covariates, "CSV of covariates with the same number of rows");
  cmd->add_option("--kind", a.kind, "dynokim or dyekim")->check(CLI::IsMember({"dynokim", "dyekim"}))->capture_default_str();
}

struct Data {
  SpinPath spins;
  CovariatePath covariates;
  std::vector<std::string> names;
  ModelKind kind;
};

Data load_data(const DataArgs& a) {
  Data d;
  const NamedMatrix s = read_spins(a.spins);
  d.spins = SpinPath(s.values);
  d.names = s.names;
  if (a.covariates.empty()) {
    d.covariates = CovariatePath::none(d.spins.length());
  } else {
    const NamedMatrix x = read_covariates(a.covariates);
    if (x.values.rows() != d.spins.length()) {
      throw std::invalid_argument("covariate file has " + std::to_string(x.values.rows()) + " rows, spins have " +
                                  std::to_string(d.spins.length()));
    }
    d.covariates = CovariatePath(x.values);
  }
  d.kind = model_kind_from_string(a.kind);
  return d;
}

void print_table(std::ostream& os, const Table& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "  " : "") << t.columns[c];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "  " : "") << format_cell(row[c]);
    os << "\n";
  }
}

FitReport truth_report(ModelKind kind, const StaticParams& params, const GasCoefficients& gas) {
  FitReport r;
  r.kind = kind;
  r.params = params;
  r.gas = gas;
  r.f_bar = gas.unconditional_mean();
  r.scales = Vector::Ones(gas.factors());
  r.static_method = "true";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score-driven kinetic Ising models: simulation, estimation, filtering and diagnostics"};
  app.config_formatter(std::make_shared<cli::JsonConfig>());
  app.set_config("--config", "", "JSON file with option values; nested objects address subcommands");
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version());
  std::string out_dir = ".";
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Sample a spin path from a known model");
  std::string sim_kind = "dynokim";
  Index sim_spins = 30, sim_length = 1000;
  std::uint64_t sim_seed = 1;
  ParamHyperSpec hyper;
  BetaPathSpec path_spec;
  std::string path_kind = "constant";
  double gas_B = 0.95, gas_A = 0.01, gas_fbar = 0.0;
  sim->add_option("--kind", sim_kind, "dynokim or dyekim")->check(CLI::IsMember({"dynokim", "dyekim"}))->capture_default_str();
  sim->add_option("--spins", sim_spins, "Number of spins N")->capture_default_str();
  sim->add_option("--length", sim_length, "Number of time steps T")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim->add_option("--J0", hyper.J0, "Mean coupling scale")->capture_default_str();
  sim->add_option("--J1", hyper.J1, "Coupling spread")->capture_default_str();
  sim->add_option("--h0", hyper.h0, "Mean bias")->capture_default_str();
  sim->add_option("--h1", hyper.h1, "Bias spread")->capture_default_str();
  sim->add_option("--beta-path", path_kind, "constant, sinusoid, double_step, ar1, exp_sinusoid or score_driven")
      ->capture_default_str();
  sim->add_option("--level", path_spec.level, "Constant beta level")->capture_default_str();
  sim->add_option("--amplitude", path_spec.amplitude, "Sinusoid amplitude")->capture_default_str();
  sim->add_option("--omega", path_spec.omega, "Sinusoid angular frequency")->capture_default_str();
  sim->add_option("--cycles", path_spec.cycles, "Cycles over the sample; overrides omega when > 0")->capture_default_str();
  sim->add_option("--step-levels", path_spec.step_levels, "Double-step plateaus")->capture_default_str();
  sim->add_option("--step-breaks", path_spec.step_breaks, "Double-step break points as fractions of T")->capture_default_str();
  sim->add_option("--ar-a0", path_spec.ar_a0, "AR(1) intercept")->capture_default_str();
  sim->add_option("--ar-a1", path_spec.ar_a1, "AR(1) persistence")->capture_default_str();
  sim->add_option("--ar-sigma", path_spec.ar_sigma, "AR(1) innovation sd")->capture_default_str();
  sim->add_flag("!--no-normalize", path_spec.normalize, "Keep the raw beta path instead of unit sample mean");
  sim->add_option("--B", gas_B, "Score-driven persistence (all factors)")->capture_default_str();
  sim->add_option("--A", gas_A, "Score-driven step size (all factors)")->capture_default_str();
  sim->add_option("--f-bar", gas_fbar, "Unconditional mean of log beta")->capture_default_str();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Estimate Theta, the target f_bar and the recursion coefficients");
  DataArgs fit_data;
  add_data_args(fit_cmd, fit_data);
  std::string static_method = "automatic";
  FitOptions fit_opts;
  fit_cmd->add_option("--static-method", static_method, "automatic, mean_field or exact")
      ->check(CLI::IsMember({"automatic", "mean_field", "exact"}))
      ->capture_default_str();
  fit_cmd->add_option("--adam-step", fit_opts.adam.step, "ADAM step size")->capture_default_str();
  fit_cmd->add_option("--adam-max-iterations", fit_opts.adam.max_iterations, "ADAM iteration cap")->capture_default_str();
  fit_cmd->add_option("--adam-tolerance", fit_opts.adam.gradient_tolerance, "Gradient-norm stopping tolerance")
      ->capture_default_str();
  fit_cmd->add_flag("!--no-grid-start", fit_opts.adam.grid_start, "Start ADAM from initial B/A instead of a grid search");

  // filter
  auto* filter_cmd = app.add_subcommand("filter", "Run the recursion with a fitted model and score forecasts");
  DataArgs filter_data;
  add_data_args(filter_cmd, filter_data);
  std::string model_path;
  double alpha = 0.5;
  bool peek = false;
  filter_cmd->add_option("--model", model_path, "model.json written by fit")->required();
  filter_cmd->add_option("--alpha", alpha, "Forecast threshold in (0, 1)")->capture_default_str();
  filter_cmd->add_flag("--peek", peek, "Use beta(t) instead of beta(t-1); NOT causal, diagnostics only");

  // lm-test
  auto* lm_cmd = app.add_subcommand("lm-test", "Lagrange-multiplier test for time variation");
  DataArgs lm_data;
  add_data_args(lm_cmd, lm_data);
  std::string lm_null = "fully_static", lm_factor = "all", lm_model;
  lm_cmd->add_option("--null", lm_null, "fully_static or all_varying_except_tested")
      ->check(CLI::IsMember({"fully_static", "all_varying_except_tested"}))
      ->capture_default_str();
  lm_cmd->add_option("--factor", lm_factor, "Factor name, index, or all")->capture_default_str();
  lm_cmd->add_option("--model", lm_model, "model.json; required for all_varying_except_tested");

  // auc-theory
  auto* auc_cmd = app.add_subcommand("auc-theory", "Expected AUC as a function of beta");
  std::vector<double> auc_betas{0.1, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0};
  double g0 = 0.0, g1 = 1.0;
  ParamHyperSpec auc_hyper;
  bool use_hyper = false;
  std::string fields_file, fields_column, auc_form = "change_of_variables";
  int bins = 200;
  auc_cmd->add_option("--beta", auc_betas, "Beta grid")->capture_default_str();
  auc_cmd->add_option("--g0", g0, "Gaussian field mean")->capture_default_str();
  auc_cmd->add_option("--g1", g1, "Gaussian field sd")->capture_default_str();
  auc_cmd->add_flag("--from-hyper", use_hyper, "Derive (g0, g1) from --J0 --J1 --h0 --h1 at each beta");
  auc_cmd->add_option("--J0", auc_hyper.J0)->capture_default_str();
  auc_cmd->add_option("--J1", auc_hyper.J1)->capture_default_str();
  auc_cmd->add_option("--h0", auc_hyper.h0)->capture_default_str();
  auc_cmd->add_option("--h1", auc_hyper.h1)->capture_default_str();
  auc_cmd->add_option("--fields", fields_file, "CSV of measured fields for a histogram distribution");
  auc_cmd->add_option("--fields-column", fields_column, "Column of --fields to use");
  auc_cmd->add_option("--bins", bins, "Histogram bins")->capture_default_str();
  auc_cmd->add_option("--form", auc_form, "change_of_variables or threshold")
      ->check(CLI::IsMember({"change_of_variables", "threshold"}))
      ->capture_default_str();

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Run a simulation study");
  std::string exp_kind;
  exp_cmd->add_option("kind", exp_kind, "Experiment kind")->required()->check(CLI::IsMember(experiment_kind_names()));
  std::optional<Index> e_spins, e_length;
  std::vector<Index> e_lengths;
  std::optional<int> e_reps, e_size_reps, e_threads;
  std::optional<std::uint64_t> e_seed;
  std::optional<double> e_J0, e_J1, e_h0, e_h1, e_B, e_A, e_fbar, e_amplitude, e_cycles;
  std::vector<double> e_amplitudes, e_betas;
  bool full_protocol = false, no_paths = false, constant_factors = false;
  exp_cmd->add_option("--spins", e_spins, "Number of spins N");
  exp_cmd->add_option("--length", e_length, "Number of time steps T");
  exp_cmd->add_option("--lengths", e_lengths, "Sample sizes for the consistency sweep");
  exp_cmd->add_option("--replications", e_reps, "Replications per design point");
  exp_cmd->add_option("--size-replications", e_size_reps, "Static-DGP replications for lm_size_power");
  exp_cmd->add_option("--threads", e_threads, "Worker threads (0 = all cores)");
  exp_cmd->add_option("--seed", e_seed, "Master seed");
  exp_cmd->add_option("--J0", e_J0);
  exp_cmd->add_option("--J1", e_J1);
  exp_cmd->add_option("--h0", e_h0);
  exp_cmd->add_option("--h1", e_h1);
  exp_cmd->add_option("--B", e_B, "Score-driven persistence of the DGP");
  exp_cmd->add_option("--A", e_A, "Score-driven step size of the DGP");
  exp_cmd->add_option("--f-bar", e_fbar, "Unconditional mean of log beta in the DGP");
  exp_cmd->add_option("--amplitudes", e_amplitudes, "Sinusoid amplitudes (misspec_sine)");
  exp_cmd->add_option("--amplitude", e_amplitude, "Sinusoid amplitude for a single-path design");
  exp_cmd->add_option("--cycles", e_cycles, "Exp-sinusoid cycles over the sample (dyekim_separation)");
  exp_cmd->add_option("--betas", e_betas, "Beta grid (auc_vs_beta)");
  exp_cmd->add_flag("--full-protocol", full_protocol, "Use the original replication counts");
  exp_cmd->add_flag("--no-paths", no_paths, "Skip the per-time path tables");
  exp_cmd->add_flag("--constant-factors", constant_factors, "dyekim_separation with every true factor at 1");

  // decompose / event-study
  auto* dec_cmd = app.add_subcommand("decompose", "Trend/seasonal decomposition of one series");
  auto* ev_cmd = app.add_subcommand("event-study", "Average standardized residuals around events");
  std::string series_file, series_column, mode = "multiplicative", events_file;
  Index period = 2, bandwidth = 2, half_width = 1, segment_length = 0;
  for (auto* cmd : {dec_cmd, ev_cmd}) {
    cmd->add_option("--series", series_file, "CSV holding the series")->required();
    cmd->add_option("--column", series_column, "Column to read (needed when the file has several)");
    cmd->add_option("--period", period, "Seasonal period in steps")->required();
    cmd->add_option("--bandwidth", bandwidth, "Trend window in steps")->required();
    cmd->add_option("--mode", mode, "multiplicative or additive")
        ->check(CLI::IsMember({"multiplicative", "additive"}))
        ->capture_default_str();
  }
  ev_cmd->add_option("--events", events_file, "CSV with a time column and optional label column")->required();
  ev_cmd->add_option("--half-width", half_width, "Window half-width in steps")->required();
  ev_cmd->add_option("--segment-length", segment_length, "Standardize per block of this many steps (0 = whole series)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  Output out;
  out.root = &app;
  const fs::path dir = out_dir;

  try {
    if (*sim) {
      out.command = "simulate";
      out.seed = sim_seed;
      const ModelKind kind = model_kind_from_string(sim_kind);
      hyper.spins = sim_spins;
      Rng rng = replication_rng(sim_seed, 0);
      const StaticParams params = sample_static_params(hyper, rng);
      const Index M = factor_count(kind, 0);
      SpinPath spins;
      Matrix truth;
      GasCoefficients gas = GasCoefficients::targeted(Vector::Zero(M), Vector::Zero(M), Vector::Zero(M));
      if (path_kind == "score_driven") {
        Vector fbar = Vector::Zero(M);
        fbar.head(kind == ModelKind::dynokim ? 1 : M - 1).setConstant(gas_fbar);
        gas = GasCoefficients::targeted(fbar, Vector::Constant(M, gas_B), Vector::Constant(M, gas_A));
        auto sd = simulate_score_driven(kind, params, gas, sim_length, rng);
        spins = std::move(sd.first);
        truth = sd.second.values;
      } else {
        if (kind != ModelKind::dynokim) {
          throw std::invalid_argument("prescribed beta paths are available for dynokim; use --beta-path score_driven");
        }
        path_spec.kind = beta_path_kind_from_string(path_kind);
        const GeneratedPath beta = make_beta_path(path_spec, sim_length - 1, rng);
        spins = simulate_path(params, beta.values, rng);
        truth = beta.values;
      }
      out.matrix(dir / "spins.csv", default_names("s", sim_spins), spins.values());
      out.matrix(dir / "factors_true.csv", factor_names(kind, 0), truth);
      out.document(dir / "model_true.json", to_json(truth_report(kind, params, gas)));
      return 0;
    }

    if (*fit_cmd) {
      out.command = "fit";
      const Data d = load_data(fit_data);
      fit_opts.static_method = static_method == "mean_field" ? StaticMethod::mean_field
                               : static_method == "exact"    ? StaticMethod::exact
                                                             : StaticMethod::automatic;
      const FitReport rep = fit(d.kind, d.spins, d.covariates, fit_opts);
      out.document(dir / "model.json", to_json(rep));
      out.table(dir / "path.csv", factor_path_table(rep.path));
      std::cout << "loglik " << rep.loglik << "  static " << rep.static_method << "  iterations "
                << rep.adam_iterations << (rep.converged ? "" : "  (not converged)")
                << (rep.boundary ? "  (boundary)" : "") << "\n";
      for (Index m = 0; m < rep.gas.factors(); ++m) {
        std::cout << factor_names(d.kind, d.covariates.count())[static_cast<std::size_t>(m)] << ": B "
                  << rep.gas.B(m) << "  A " << rep.gas.A(m) << "  w " << rep.gas.w(m) << "\n";
      }
      return 0;
    }

    if (*filter_cmd) {
      out.command = "filter";
      const Data d = load_data(filter_data);
      const FittedModel model = fitted_model_from_json(read_text(model_path));
      if (model.kind != d.kind) throw std::invalid_argument("--kind differs from the kind stored in the model");
      const FieldCache cache(model.kind, d.spins, d.covariates, model.params);
      const FactorPath path = filter(cache, model.gas, model.gas.unconditional_mean());
      out.table(dir / "path.csv", factor_path_table(path));
      const Matrix prob = forecast_probabilities(cache, path, peek);
      if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("--alpha must lie in (0, 1)");
      Matrix outcome(prob.rows(), prob.cols());
      Table fc;
      fc.columns = {"t", "spin", "probability", "prediction", "outcome"};
      for (Index r = 0; r < prob.rows(); ++r) {
        outcome.row(r) = cache.next(r + 1);
        for (Index i = 0; i < prob.cols(); ++i) {
          fc.add_row({static_cast<std::int64_t>(r + 1), d.names[static_cast<std::size_t>(i)], prob(r, i),
                      static_cast<std::int64_t>(prob(r, i) >= alpha ? 1 : -1),
                      static_cast<std::int64_t>(outcome(r, i))});
        }
      }
      const auto pv = std::vector<double>(prob.data(), prob.data() + prob.size());
      const auto ov = std::vector<double>(outcome.data(), outcome.data() + outcome.size());
      const RocCurve roc = empirical_auc(pv, ov);
      const std::string label = peek ? "non-causal (peek)" : "causal";
      out.table(dir / "forecast.csv", fc, {{"forecast", label}});
      out.table(dir / "roc.csv", roc_table(roc), {{"auc", format_cell(roc.auc)}, {"forecast", label}});
      std::cout << "loglik " << path.total_loglik() << "  AUC " << roc.auc << " (" << label << ")\n";
      return 0;
    }

    if (*lm_cmd) {
      out.command = "lm-test";
      const Data d = load_data(lm_data);
      const LmNull null = lm_null_from_string(lm_null);
      std::optional<FittedModel> model;
      if (!lm_model.empty()) model = fitted_model_from_json(read_text(lm_model));
      if (null == LmNull::all_varying_except_tested && !model) {
        throw std::invalid_argument("--null all_varying_except_tested needs --model");
      }
      StaticParams params = model ? model->params : fit_static(d.spins, d.covariates).params;
      const FieldCache cache(d.kind, d.spins, d.covariates, params);
      const auto names = factor_names(d.kind, d.covariates.count());
      std::vector<Index> factors;
      if (lm_factor == "all") {
        for (Index m = 0; m < cache.factors(); ++m) factors.push_back(m);
      } else {
        const auto it = std::find(names.begin(), names.end(), lm_factor);
        if (it != names.end()) factors.push_back(static_cast<Index>(it - names.begin()));
        else factors.push_back(static_cast<Index>(std::stoll(lm_factor)));
      }
      std::vector<LmTestResult> results;
      for (Index m : factors) {
        results.push_back(lm_test(cache, m, null, model ? &model->gas : nullptr));
        const auto& r = results.back();
        std::cout << r.factor_name << ": LM " << r.statistic << "  p " << r.p_value
                  << (r.defined ? "" : "  (undefined: degenerate scores)") << "\n";
      }
      out.table(dir / "lm.csv", lm_table(results));
      return 0;
    }

    if (*auc_cmd) {
      out.command = "auc-theory";
      const AucForm form = auc_form == "threshold" ? AucForm::threshold : AucForm::change_of_variables;
      std::optional<FieldDistribution> hist;
      if (!fields_file.empty()) {
        const Vector f = read_series(fields_file, fields_column);
        hist = FieldDistribution::from_samples(std::vector<double>(f.data(), f.data() + f.size()), bins);
      }
      Table t;
      t.columns = {"beta", "auc", "error_estimate", "g0", "g1", "distribution"};
      for (double beta : auc_betas) {
        if (hist) {
          const auto r = theoretical_auc_detail(beta, *hist, form);
          t.add_row({beta, r.auc, r.error_estimate, hist->mean(), std::nan(""), std::string("histogram")});
          continue;
        }
        double m0 = g0, m1 = g1;
        if (use_hyper) {
          auc_hyper.spins = 2;
          if (beta * auc_hyper.J0 >= 1.0) {
            t.add_row({beta, std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::string("ferromagnetic")});
            continue;
          }
          const FieldMoments fm = gaussian_field_moments(auc_hyper, beta);
          m0 = fm.g0;
          m1 = fm.g1;
        }
        const auto r = theoretical_auc_detail(beta, FieldDistribution::gaussian(m0, m1), form);
        t.add_row({beta, r.auc, r.error_estimate, m0, m1, std::string("gaussian")});
      }
      out.table(dir / "auc_theory.csv", t);
      return 0;
    }

    if (*exp_cmd) {
      out.command = "experiment " + exp_kind;
      ExperimentConfig c = ExperimentConfig::defaults(experiment_kind_from_string(exp_kind));
      if (full_protocol) c.use_full_protocol();
      if (e_spins) c.spins = *e_spins;
      if (e_length) c.length = *e_length;
      if (!e_lengths.empty()) c.lengths = e_lengths;
      if (e_reps) c.replications = *e_reps;
      if (e_size_reps) c.size_replications = *e_size_reps;
      if (e_threads) c.threads = *e_threads;
      if (e_seed) c.seed = *e_seed;
      if (e_J0) c.hyper.J0 = *e_J0;
      if (e_J1) c.hyper.J1 = *e_J1;
      if (e_h0) c.hyper.h0 = *e_h0;
      if (e_h1) c.hyper.h1 = *e_h1;
      if (e_B) c.gas_B = *e_B;
      if (e_A) c.gas_A = *e_A;
      if (e_fbar) c.f_bar = *e_fbar;
      if (!e_amplitudes.empty()) c.amplitudes = e_amplitudes;
      if (e_amplitude) c.beta_path.amplitude = *e_amplitude;
      if (e_cycles) c.dyekim_cycles = *e_cycles;
      if (!e_betas.empty()) c.betas = e_betas;
      if (no_paths) c.keep_paths = false;
      if (constant_factors) c.constant_factors = true;
      c.output_dir = out_dir;
      out.seed = c.seed;
      const ExperimentResult res = run_experiment(c);
      const std::string config_json = to_json(c);
      for (const auto& [name, table] : res.tables) {
        const fs::path p = dir / (exp_kind + "_" + name + ".csv");
        write_table(p, table);
        write_text(metadata_path(p),
                   metadata_json(out.command, config_json, c.seed,
                                 {{"table", name}, {"rows", std::to_string(table.rows.size())},
                                  {"failures", std::to_string(res.failures)}}));
        std::cout << "wrote " << p.string() << "\n";
      }
      for (const auto& m : res.messages) std::cerr << "excluded " << m << "\n";
      if (res.tables.count("summary")) print_table(std::cout, res.tables.at("summary"));
      return 0;
    }

    if (*dec_cmd || *ev_cmd) {
      out.command = *dec_cmd ? "decompose" : "event-study";
      const Vector series = read_series(series_file, series_column);
      const DecompositionMode dm = decomposition_mode_from_string(mode);
      const Decomposition d = decompose(series, period, bandwidth, dm);
      if (*dec_cmd) {
        out.table(dir / "decomposition.csv", decomposition_table(series, d));
        return 0;
      }
      EventStudySpec spec;
      spec.period = period;
      spec.bandwidth = bandwidth;
      spec.half_width = half_width;
      spec.events = read_events(events_file);
      if (segment_length > 0) {
        for (Index s = 0; s < series.size(); s += segment_length) spec.segment_starts.push_back(s);
      }
      spec.validate();
      // multiplicative residuals fluctuate around 1, additive ones around 0; both are standardized
      const Vector z = standardize_segments(d.residual, spec.segment_starts);
      const auto curves = event_study_by_label(z, spec.events, spec.half_width);
      out.table(dir / "event_study.csv", event_curve_table(curves));
      const auto& pooled = curves.front();
      std::cout << "events used " << pooled.events_used << ", dropped " << pooled.events_dropped << ", band +/-"
                << pooled.band << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
