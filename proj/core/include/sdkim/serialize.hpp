#pragma once

// JSON documents: fitted models, experiment configurations and the metadata
// sidecar written next to every CSV output.

#include "sdkim/estimation.hpp"
#include "sdkim/experiments.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sdkim {

/// Library version followed by the Eigen and Boost versions it was built with.
std::string library_version();

/// Everything needed to rerun the filter: kind, Theta, recursion coefficients.
struct FittedModel {
  ModelKind kind = ModelKind::dynokim;
  StaticParams params;
  GasCoefficients gas;
  Vector f_bar;
};

std::string to_json(const FitReport& report);
FittedModel fitted_model_from_json(const std::string& text);

std::string to_json(const ExperimentConfig& config);
/// Keys missing from `text` keep the defaults of its "kind".
ExperimentConfig experiment_config_from_json(const std::string& text);

/// Sidecar document: command, version, seed, the resolved configuration
/// (embedded as JSON) and free-form string entries.
std::string metadata_json(const std::string& command, const std::string& config_json, std::uint64_t seed,
                          const std::vector<std::pair<std::string, std::string>>& extra = {});

/// `<path>.meta.json`
std::filesystem::path metadata_path(const std::filesystem::path& csv);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sdkim
