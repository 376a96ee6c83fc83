#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "latefuse/pde/solvers.hpp"

namespace latefuse::pde {

/// How the initial states were drawn; stored verbatim in the manifest.
std::string initial_condition_kind(EquationFamily family);

struct DatasetManifest {
  int schema_version = 1;
  EquationFamily family = EquationFamily::kAdvection;
  Boundary boundary = Boundary::kPeriodic;
  Split split = Split::kTrain;
  GridSpec grid;
  std::vector<ParameterRange> ranges;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  InitialConditionSpec initial_condition;  // seed field unused; drawn per trajectory
  std::string dtype = "float32";

  ad::Shape params_shape() const;  // [N, P]
  ad::Shape states_shape() const;  // [N, T+1, V, X(, Y)]
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Trajectory> trajectories;
};

struct GenerateOptions {
  EquationFamily family = EquationFamily::kAdvection;
  Split split = Split::kTrain;
  std::vector<ParameterRange> ranges;  // empty: default_ranges(family, split)
  std::size_t count = 0;
  std::uint64_t seed = 0;
  GridSpec grid;
  InitialConditionSpec initial_condition;
};

/// Draws `count` parameter vectors uniformly from the open ranges and solves
/// each trajectory from a fresh initial condition. Trajectory i depends only
/// on (seed, split, i), so the result is independent of thread count.
/// Parameters and states are rounded to float32 so that the in-memory
/// dataset equals what write_dataset stores.
Dataset generate_dataset(const GenerateOptions& opts);

/// Directory container: manifest.json, params.bin, states.bin.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);
/// Verifies schema version, checksums and shapes before building anything.
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace latefuse::pde
