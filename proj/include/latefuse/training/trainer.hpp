#pragma once

#include <optional>
#include <span>
#include <vector>

#include "latefuse/autodiff/adam.hpp"
#include "latefuse/common/error.hpp"
#include "latefuse/pde/dataset.hpp"
#include "latefuse/training/surrogate.hpp"

namespace latefuse::train {

struct TrainConfig {
  std::size_t epochs = 100;
  double initial_lr = 1e-3;
  std::size_t lr_halving_epoch = 50;  // 0-based epoch from which lr is halved
  std::size_t batch_size = 32;
  double lambda_sparse = 1e-4;
  double validation_fraction = 0.10;
  std::uint64_t seed = 0;
  ad::AdamOptions adam;  // learning_rate is overridden by the schedule

  void validate() const;
};

nlohmann::ordered_json to_json(const TrainConfig& c);

/// initial_lr before lr_halving_epoch, initial_lr / 2 from then on.
double scheduled_learning_rate(const TrainConfig& c, std::size_t epoch);

struct LossTerms {
  Variable total;
  Variable data;    // mean squared error over every entry of the batch
  Variable sparse;  // sum |xi|; zero when xi is undefined (baseline)
};

/// total = data + lambda * sparse. Throws NonFiniteError on NaN/Inf inputs.
LossTerms compute_loss(const Variable& pred, const Tensor& truth, const Variable& xi, double lambda_sparse);

/// (trajectory, t): input states[t], target states[t + 1], beta of the trajectory.
struct TransitionPair {
  std::size_t trajectory = 0;
  std::size_t step = 0;
  friend bool operator==(const TransitionPair&, const TransitionPair&) = default;
};

/// All consecutive snapshot pairs of the listed trajectories (all if empty).
std::vector<TransitionPair> make_transition_pairs(const pde::Dataset& ds,
                                                  std::span<const std::size_t> trajectories = {});

struct Batch {
  Tensor u;       // [B, V, S...]
  Tensor target;  // [B, V, S...]
  Tensor beta;    // [B, P]
};
Batch gather_batch(const pde::Dataset& ds, std::span<const TransitionPair> pairs);

struct EpochRecord {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;       // pair-weighted mean of batch totals
  double train_data_loss = 0.0;  // pair-weighted mean of batch L_data
  std::optional<double> val_data_loss;
};

struct TrainReport {
  ModelSpec model;
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  std::vector<std::size_t> validation_trajectories;
  std::size_t train_pairs = 0;
  std::size_t validation_pairs = 0;
  Tensor final_xi;              // empty for the baseline
  double best_val_data_loss = 0.0;
  double wall_seconds = 0.0;    // not serialized (keeps artifacts reproducible)

  nlohmann::ordered_json to_json() const;
};

/// Raised when a loss or gradient turns non-finite; carries the epochs
/// completed so far.
class TrainingDiverged : public NonFiniteError {
 public:
  TrainingDiverged(const std::string& what, TrainReport report)
      : NonFiniteError(what), report_(std::move(report)) {}
  const TrainReport& report() const { return report_; }

 private:
  TrainReport report_;
};

/// Trajectory-level split: a uniformly random round(fraction * N) subset
/// (drawn from seed) is held out for validation.
std::vector<std::size_t> validation_trajectories(std::size_t count, double fraction, std::uint64_t seed);

/// Mean squared error over all entries of all validation pairs.
double validation_data_loss(const Surrogate& model, const pde::Dataset& ds, std::span<const TransitionPair> pairs,
                            std::size_t batch_size);

struct TrainResult {
  Surrogate model;  // best-validation-epoch weights
  TrainReport report;
};

/// Mini-batch Adam on single-step pairs of the training trajectories.
TrainResult train(const ModelSpec& spec, const pde::Dataset& ds, const TrainConfig& cfg);

struct SweepRow {
  double lambda = 0.0;
  std::optional<double> val_loss;  // empty if the cell failed
  bool selected = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<std::size_t> selected;  // index into rows
  std::vector<TrainResult> results;     // aligned with rows; default-constructed for failed cells
};

/// One training run per lambda with the same seed and data split; picks the
/// lowest validation L_data, ties going to the larger lambda. Failed cells
/// are recorded and skipped.
SweepResult hyperparameter_sweep(const ModelSpec& spec, const pde::Dataset& ds, const TrainConfig& cfg,
                                 const std::vector<double>& lambdas);

/// CSV with columns lambda,val_loss,selected (failed cells: val_loss "failed").
std::string sweep_csv(const SweepResult& sweep);

}  // namespace latefuse::train
