#include <doctest.h>

#include <sdkim/csv_io.hpp>
#include <sdkim/serialize.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

using namespace sdkim;
namespace fs = std::filesystem;

namespace {

const fs::path kOut = fs::temp_directory_path() / "sdkim_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(SDKIM_CLI_PATH) + " --out " + kOut.string() + " " + args + " > " +
                          (kOut / "stdout.txt").string() + " 2>&1";
  return std::system(cmd.c_str());
}

bool has_sidecar(const std::string& csv) {
  const fs::path p = kOut / csv;
  if (!fs::exists(p) || !fs::exists(metadata_path(p))) return false;
  const auto meta = nlohmann::json::parse(read_text(metadata_path(p)));
  return meta.contains("command") && meta.contains("version") && meta.contains("config");
}

}  // namespace

TEST_CASE("simulate, fit, filter and test end to end") {
  fs::remove_all(kOut);
  fs::create_directories(kOut);
  REQUIRE(run("simulate --spins 10 --length 400 --seed 3 --beta-path sinusoid --cycles 2") == 0);
  CHECK(has_sidecar("spins.csv"));
  CHECK(has_sidecar("factors_true.csv"));
  const NamedMatrix spins = read_spins(kOut / "spins.csv");
  CHECK(spins.values.rows() == 400);
  CHECK(spins.values.cols() == 10);

  const std::string data = "--spins " + (kOut / "spins.csv").string();
  REQUIRE(run("fit " + data + " --adam-max-iterations 100") == 0);
  CHECK(fs::exists(kOut / "model.json"));
  CHECK(has_sidecar("path.csv"));
  const FittedModel model = fitted_model_from_json(read_text(kOut / "model.json"));
  CHECK(model.params.spins() == 10);

  REQUIRE(run("filter " + data + " --model " + (kOut / "model.json").string()) == 0);
  CHECK(has_sidecar("forecast.csv"));
  CHECK(has_sidecar("roc.csv"));

  REQUIRE(run("lm-test " + data) == 0);
  CHECK(has_sidecar("lm.csv"));

  REQUIRE(run("decompose --series " + (kOut / "path.csv").string() + " --column beta --period 10 --bandwidth 10") == 0);
  CHECK(has_sidecar("decomposition.csv"));
  REQUIRE(run("event-study --series " + (kOut / "path.csv").string() +
              " --column beta --period 10 --bandwidth 10 --half-width 3 --events " + SDKIM_FIXTURE_DIR +
              "/events.csv") == 0);
  CHECK(has_sidecar("event_study.csv"));
}

TEST_CASE("auc-theory and experiment subcommands") {
  fs::create_directories(kOut);
  REQUIRE(run("auc-theory --beta 0.5 1 2 --g1 1") == 0);
  CHECK(has_sidecar("auc_theory.csv"));
  REQUIRE(run("experiment auc_vs_beta --spins 10 --length 200 --replications 2 --betas 0.5 1") == 0);
  CHECK(has_sidecar("auc_vs_beta_summary.csv"));
}

TEST_CASE("JSON config supplies options and flags override it") {
  fs::create_directories(kOut);
  write_text(kOut / "cfg.json", R"({"simulate": {"spins": 4, "length": 50, "seed": 9}})");
  REQUIRE(run("--config " + (kOut / "cfg.json").string() + " simulate --length 60") == 0);
  const NamedMatrix spins = read_spins(kOut / "spins.csv");
  CHECK(spins.values.cols() == 4);
  CHECK(spins.values.rows() == 60);
}

TEST_CASE("bad input exits with an error") {
  fs::create_directories(kOut);
  CHECK(run("fit --spins " + std::string(SDKIM_FIXTURE_DIR) + "/spins_bad_cell.csv") != 0);
  CHECK(read_text(kOut / "stdout.txt").find("column 2 (s1)") != std::string::npos);
  CHECK(run("no-such-command") != 0);
}
