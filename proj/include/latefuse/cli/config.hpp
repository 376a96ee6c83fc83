#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "latefuse/pde/equation.hpp"
#include "latefuse/training/trainer.hpp"

namespace latefuse::cli {

/// Fully resolved settings of one command. Missing keys take preset
/// defaults; the resolved form is what gets recorded next to the artifacts.
struct RunConfig {
  std::string command;
  pde::EquationFamily equation = pde::EquationFamily::kAdvection;
  pde::Preset preset = pde::Preset::kDesk;
  pde::SplitCounts counts;
  std::map<pde::Split, std::vector<pde::ParameterRange>> ranges;
  train::ModelKind model = train::ModelKind::kLateFusion;
  std::string library;  // late fusion; resolved to the family default
  std::size_t width = 16;
  std::size_t modes = 8;
  train::TrainConfig train;
  std::vector<std::uint64_t> seeds{0};
  std::vector<double> lambdas;         // train: > 1 entry runs a sweep; ablate grid
  std::vector<std::string> libraries;  // ablate
  std::string data;                    // dataset root (train/, in_domain_test/, out_domain_test/)
  std::string checkpoint;              // train output dir or a single model dir
  std::string pred;                    // eval self-eval: dataset compared against `data`
  pde::Split split = pde::Split::kInDomainTest;  // inspect
  std::size_t trajectory = 0;                      // inspect

  train::ModelSpec model_spec(std::uint64_t seed) const;
  train::TrainConfig train_config(std::uint64_t seed) const;
};

/// Keys accepted by every command.
const std::vector<std::string>& config_keys();

/// Validates `j` (unknown keys, types, values) and resolves defaults.
/// Throws ConfigError.
RunConfig parse_config(const nlohmann::ordered_json& j, const std::string& command);

nlohmann::ordered_json to_json(const RunConfig& c);

}  // namespace latefuse::cli
