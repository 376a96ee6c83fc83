#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"
#include "latefuse/autodiff/tensor.hpp"

namespace latefuse::eval {

using ad::Tensor;

struct MetricsReport {
  double rmse = 0.0;
  double boundary_rmse = 0.0;
  double nrmse = 0.0;
  double max_error = 0.0;
  double conserved_error = 0.0;
  double fourier_rmse = 0.0;
  std::size_t samples = 0;

  nlohmann::ordered_json to_json() const;
};

inline constexpr double kNrmseEpsilon = 1e-8;

/// Per-trajectory sufficient statistics over snapshots [1, window_end).
struct SampleStats {
  double mse = 0.0;            // mean of d^2 over all compared entries
  double truth_ms = 0.0;       // mean of truth^2 over the same entries
  double boundary_mse = 0.0;   // mean of d^2 over boundary entries
  double max_abs = 0.0;        // max |d|
  double conserved_sq = 0.0;   // sum over (snapshot, variable) of (sum_x d)^2
  double fourier_ms = 0.0;     // mean over (snapshot, variable, bin) of |DFT(d)_k|^2
};

/// pred/truth [T+1, V, S...] for one trajectory; spatial_dims = rank - 2.
/// window_end defaults to T+1 (all snapshots after t=0).
SampleStats sample_stats(const Tensor& pred, const Tensor& truth, std::size_t window_end = 0);

/// Combines samples: rmse = sqrt(mean mse), nrmse = rmse / (sqrt(mean
/// truth_ms) + eps), boundary/Fourier analogous, max over max_abs,
/// conserved = sqrt(mean conserved_sq).
MetricsReport aggregate(std::span<const SampleStats> samples);

/// pred/truth [N, T+1, V, S...]; t = 0 is excluded from every metric.
MetricsReport compute_metrics(const Tensor& pred, const Tensor& truth);

}  // namespace latefuse::eval
