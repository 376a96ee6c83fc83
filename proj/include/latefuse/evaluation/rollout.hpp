#pragma once

#include <optional>
#include <span>

#include "latefuse/evaluation/metrics.hpp"
#include "latefuse/pde/dataset.hpp"
#include "latefuse/training/surrogate.hpp"

namespace latefuse::eval {

struct RolloutResult {
  Tensor predicted;                      // [steps+1, V, S...]; index 0 = u0
  std::optional<std::size_t> blowup_step;  // first non-finite snapshot; later entries are NaN
  std::size_t finite_snapshots() const { return blowup_step.value_or(predicted.dim(0)); }
};

/// Applies the single-step map `steps` times from u0 [V, S...]. Only u0 and
/// beta enter the model. Blow-up is recorded, not thrown.
RolloutResult rollout(const train::Surrogate& model, const Tensor& u0, std::span<const double> beta, std::size_t steps);

/// Rollouts of every trajectory from its states[0] and params, batched and
/// run in parallel over read-only model state. Equal to per-trajectory
/// rollout() results.
std::vector<RolloutResult> rollout_dataset(const train::Surrogate& model, const pde::Dataset& ds);

struct SplitEvaluation {
  MetricsReport metrics;                      // over all trajectories
  std::vector<MetricsReport> per_trajectory;
  std::vector<std::size_t> blowups;           // trajectory indices that blew up
};

/// Metrics of rollouts against the dataset; blown-up trajectories are scored
/// on their finite prefix.
SplitEvaluation evaluate_split(const train::Surrogate& model, const pde::Dataset& ds);
SplitEvaluation evaluate_rollouts(const std::vector<RolloutResult>& rollouts, const pde::Dataset& ds);

}  // namespace latefuse::eval
