#pragma once

#include <optional>
#include <string>
#include <vector>

#include "latefuse/evaluation/rollout.hpp"

namespace latefuse::eval {

/// One trajectory's rollout RMSE tagged with where it came from.
struct ParameterRow {
  std::string equation;
  std::string model;
  std::uint64_t seed = 0;
  std::string split;
  std::size_t trajectory = 0;
  std::vector<double> beta;
  double rmse = 0.0;
};

std::vector<ParameterRow> parameter_rows(const std::string& equation, const std::string& model, std::uint64_t seed,
                                         const std::string& split, const pde::Dataset& ds,
                                         const SplitEvaluation& evaluation);

/// equation,model,seed,split,trajectory,<param names...>,rmse
std::string parameter_csv(const std::vector<ParameterRow>& rows, const std::vector<std::string>& param_names);

/// Per (equation, model, split): the pooled RMSE of each seed, then mean and
/// sample standard deviation across seeds (std empty for a single seed).
struct SummaryRow {
  std::string equation;
  std::string model;
  std::string split;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed_rmse;
  double mean = 0.0;
  std::optional<double> std;
};

/// Pooled RMSE of a seed = sqrt(mean over its trajectories of rmse^2), i.e.
/// the split-level RMSE. Groups appear in first-seen order.
std::vector<SummaryRow> summarize(const std::vector<ParameterRow>& rows);

/// equation,model,split,seeds,rmse_mean,rmse_std
std::string summary_csv(const std::vector<SummaryRow>& rows);

double median(std::vector<double> values);

}  // namespace latefuse::eval
