#include "sdkim/serialize.hpp"

#include <json.hpp>

#include <boost/version.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef SDKIM_VERSION_STRING
#define SDKIM_VERSION_STRING "unknown"
#endif

namespace sdkim {

using nlohmann::json;

namespace {

json vec(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json mat(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Vector to_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

Matrix to_mat(const json& j, Index cols_if_empty) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return Matrix(0, cols_if_empty);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw std::invalid_argument("ragged matrix in JSON");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return m;
}

std::string static_method_name(StaticMethod m) {
  switch (m) {
    case StaticMethod::automatic: return "automatic";
    case StaticMethod::mean_field: return "mean_field";
    case StaticMethod::exact: return "exact";
  }
  return "automatic";
}

StaticMethod static_method_from(const std::string& s) {
  if (s == "automatic") return StaticMethod::automatic;
  if (s == "mean_field") return StaticMethod::mean_field;
  if (s == "exact") return StaticMethod::exact;
  throw std::invalid_argument("unknown static method: " + s);
}

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string library_version() {
  std::ostringstream os;
  os << "sdkim " << SDKIM_VERSION_STRING << " (Eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
     << EIGEN_MINOR_VERSION << ", Boost " << BOOST_VERSION / 100000 << "." << BOOST_VERSION / 100 % 1000 << ")";
  return os.str();
}

std::string to_json(const FitReport& report) {
  json j;
  j["kind"] = to_string(report.kind);
  j["factors"] = factor_names(report.kind, report.params.covariates());
  j["params"] = {{"J", mat(report.params.J)}, {"h", vec(report.params.h)}, {"b", mat(report.params.b)}};
  j["gas"] = {{"w", vec(report.gas.w)}, {"B", vec(report.gas.B)}, {"A", vec(report.gas.A)}};
  j["f_bar"] = vec(report.f_bar);
  j["scales"] = vec(report.scales);
  j["loglik"] = report.loglik;
  j["static_method"] = report.static_method;
  j["ridge_applied"] = report.ridge_applied;
  j["adam_iterations"] = report.adam_iterations;
  j["converged"] = report.converged;
  j["boundary"] = report.boundary;
  j["final_gradient_norm"] = report.gradient_norms.empty() ? 0.0 : report.gradient_norms.back();
  j["version"] = library_version();
  return j.dump(2);
}

FittedModel fitted_model_from_json(const std::string& text) {
  const json j = json::parse(text);
  FittedModel m;
  m.kind = model_kind_from_string(j.at("kind").get<std::string>());
  const json& p = j.at("params");
  m.params.J = to_mat(p.at("J"), 0);
  m.params.h = to_vec(p.at("h"));
  m.params.b = to_mat(p.at("b"), 0);
  if (m.params.b.rows() == 0) m.params.b.resize(m.params.J.rows(), 0);
  m.params.validate();
  const json& g = j.at("gas");
  m.gas.w = to_vec(g.at("w"));
  m.gas.B = to_vec(g.at("B"));
  m.gas.A = to_vec(g.at("A"));
  m.gas.validate();
  m.f_bar = j.contains("f_bar") ? to_vec(j.at("f_bar")) : m.gas.unconditional_mean();
  if (m.gas.factors() != factor_count(m.kind, m.params.covariates())) {
    throw std::invalid_argument("fitted model: coefficient count does not match the model kind");
  }
  return m;
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["spins"] = c.spins;
  j["length"] = c.length;
  j["lengths"] = c.lengths;
  j["replications"] = c.replications;
  j["size_replications"] = c.size_replications;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  j["hyper"] = {{"J0", c.hyper.J0}, {"J1", c.hyper.J1}, {"h0", c.hyper.h0}, {"h1", c.hyper.h1}};
  j["gas"] = {{"B", c.gas_B}, {"A", c.gas_A}, {"f_bar", c.f_bar}};
  const BetaPathSpec& b = c.beta_path;
  j["beta_path"] = {{"kind", to_string(b.kind)},     {"level", b.level},         {"amplitude", b.amplitude},
                    {"omega", b.omega},              {"cycles", b.cycles},       {"step_levels", b.step_levels},
                    {"step_breaks", b.step_breaks},  {"ar_a0", b.ar_a0},         {"ar_a1", b.ar_a1},
                    {"ar_sigma", b.ar_sigma},        {"normalize", b.normalize}};
  j["amplitudes"] = c.amplitudes;
  j["betas"] = c.betas;
  j["dyekim_cycles"] = c.dyekim_cycles;
  j["constant_factors"] = c.constant_factors;
  j["keep_paths"] = c.keep_paths;
  j["fit"] = {{"static_method", static_method_name(c.fit.static_method)},
              {"adam",
               {{"step", c.fit.adam.step},
                {"max_iterations", c.fit.adam.max_iterations},
                {"gradient_tolerance", c.fit.adam.gradient_tolerance},
                {"patience", c.fit.adam.patience},
                {"plateau_tolerance", c.fit.adam.plateau_tolerance},
                {"grid_start", c.fit.adam.grid_start}}}};
  return j.dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig c = ExperimentConfig::defaults(experiment_kind_from_string(j.at("kind").get<std::string>()));
  get_if_present(j, "spins", c.spins);
  get_if_present(j, "length", c.length);
  get_if_present(j, "lengths", c.lengths);
  get_if_present(j, "replications", c.replications);
  get_if_present(j, "size_replications", c.size_replications);
  get_if_present(j, "seed", c.seed);
  get_if_present(j, "output_dir", c.output_dir);
  get_if_present(j, "threads", c.threads);
  if (j.contains("hyper")) {
    const json& h = j.at("hyper");
    get_if_present(h, "J0", c.hyper.J0);
    get_if_present(h, "J1", c.hyper.J1);
    get_if_present(h, "h0", c.hyper.h0);
    get_if_present(h, "h1", c.hyper.h1);
  }
  if (j.contains("gas")) {
    const json& g = j.at("gas");
    get_if_present(g, "B", c.gas_B);
    get_if_present(g, "A", c.gas_A);
    get_if_present(g, "f_bar", c.f_bar);
  }
  if (j.contains("beta_path")) {
    const json& b = j.at("beta_path");
    if (b.contains("kind")) c.beta_path.kind = beta_path_kind_from_string(b.at("kind").get<std::string>());
    get_if_present(b, "level", c.beta_path.level);
    get_if_present(b, "amplitude", c.beta_path.amplitude);
    get_if_present(b, "omega", c.beta_path.omega);
    get_if_present(b, "cycles", c.beta_path.cycles);
    get_if_present(b, "step_levels", c.beta_path.step_levels);
    get_if_present(b, "step_breaks", c.beta_path.step_breaks);
    get_if_present(b, "ar_a0", c.beta_path.ar_a0);
    get_if_present(b, "ar_a1", c.beta_path.ar_a1);
    get_if_present(b, "ar_sigma", c.beta_path.ar_sigma);
    get_if_present(b, "normalize", c.beta_path.normalize);
  }
  get_if_present(j, "amplitudes", c.amplitudes);
  get_if_present(j, "betas", c.betas);
  get_if_present(j, "dyekim_cycles", c.dyekim_cycles);
  get_if_present(j, "constant_factors", c.constant_factors);
  get_if_present(j, "keep_paths", c.keep_paths);
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    if (f.contains("static_method")) c.fit.static_method = static_method_from(f.at("static_method").get<std::string>());
    if (f.contains("adam")) {
      const json& a = f.at("adam");
      get_if_present(a, "step", c.fit.adam.step);
      get_if_present(a, "max_iterations", c.fit.adam.max_iterations);
      get_if_present(a, "gradient_tolerance", c.fit.adam.gradient_tolerance);
      get_if_present(a, "patience", c.fit.adam.patience);
      get_if_present(a, "plateau_tolerance", c.fit.adam.plateau_tolerance);
      get_if_present(a, "grid_start", c.fit.adam.grid_start);
    }
  }
  c.validate();
  return c;
}

std::string metadata_json(const std::string& command, const std::string& config_json, std::uint64_t seed,
                          const std::vector<std::pair<std::string, std::string>>& extra) {
  json j;
  j["command"] = command;
  j["version"] = library_version();
  j["seed"] = seed;
  j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  for (const auto& [k, v] : extra) j[k] = v;
  return j.dump(2);
}

std::filesystem::path metadata_path(const std::filesystem::path& csv) {
  return std::filesystem::path(csv.string() + ".meta.json");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

}  // namespace sdkim
