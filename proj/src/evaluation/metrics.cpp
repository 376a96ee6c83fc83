#include "latefuse/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "latefuse/autodiff/fft.hpp"
#include "latefuse/common/error.hpp"

namespace latefuse::eval {

namespace {

// True when the flat spatial offset lies on the first or last index of
// some spatial dimension.
bool on_boundary(std::size_t offset, const ad::Shape& spatial) {
  for (std::size_t d = spatial.size(); d-- > 0;) {
    const std::size_t i = offset % spatial[d];
    offset /= spatial[d];
    if (i == 0 || i + 1 == spatial[d]) return true;
  }
  return false;
}

}  // namespace

nlohmann::ordered_json MetricsReport::to_json() const {
  return {{"rmse", rmse},
          {"boundary_rmse", boundary_rmse},
          {"nrmse", nrmse},
          {"max_error", max_error},
          {"conserved_error", conserved_error},
          {"fourier_rmse", fourier_rmse},
          {"samples", samples}};
}

SampleStats sample_stats(const Tensor& pred, const Tensor& truth, std::size_t window_end) {
  if (pred.shape() != truth.shape()) {
    throw ShapeError("metrics: prediction " + ad::shape_str(pred.shape()) + " vs truth " + ad::shape_str(truth.shape()));
  }
  if (pred.rank() < 3) throw ShapeError("metrics: expected [T+1, V, S...]");
  const std::size_t snapshots = pred.dim(0), vars = pred.dim(1);
  if (window_end == 0) window_end = snapshots;
  if (window_end > snapshots) throw ShapeError("metrics: window beyond the trajectory");
  const ad::Shape spatial(pred.shape().begin() + 2, pred.shape().end());
  const std::size_t space = ad::shape_numel(spatial);

  SampleStats s;
  if (window_end < 2) return s;
  std::size_t boundary_count = 0;
  double sq = 0.0, truth_sq = 0.0, boundary_sq = 0.0;
  ad::Shape block_shape{(window_end - 1) * vars};
  block_shape.insert(block_shape.end(), spatial.begin(), spatial.end());
  Tensor diff(block_shape);  // compared snapshots, one spatial block per (t, v)
  const std::size_t skip = vars * space;  // t = 0
  for (std::size_t i = 0; i < diff.numel(); ++i) {
    const double d = pred[skip + i] - truth[skip + i];
    const double t = truth[skip + i];
    diff[i] = d;
    sq += d * d;
    truth_sq += t * t;
    s.max_abs = std::max(s.max_abs, std::abs(d));
    if (on_boundary(i % space, spatial)) {
      boundary_sq += d * d;
      ++boundary_count;
    }
  }
  const auto n = static_cast<double>(diff.numel());
  s.mse = sq / n;
  s.truth_ms = truth_sq / n;
  s.boundary_mse = boundary_count ? boundary_sq / static_cast<double>(boundary_count) : 0.0;
  for (std::size_t b = 0; b < (window_end - 1) * vars; ++b) {
    double total = 0.0;
    for (std::size_t x = 0; x < space; ++x) total += diff[b * space + x];
    s.conserved_sq += total * total;
  }
  const auto energy = ad::fft::full_spectrum_energy(diff, spatial.size());
  double fourier = 0.0;
  for (double e : energy) fourier += e;
  s.fourier_ms = fourier / n;
  return s;
}

MetricsReport aggregate(std::span<const SampleStats> samples) {
  MetricsReport r;
  r.samples = samples.size();
  if (samples.empty()) return r;
  double mse = 0.0, truth = 0.0, boundary = 0.0, conserved = 0.0, fourier = 0.0;
  for (const auto& s : samples) {
    mse += s.mse;
    truth += s.truth_ms;
    boundary += s.boundary_mse;
    conserved += s.conserved_sq;
    fourier += s.fourier_ms;
    r.max_error = std::max(r.max_error, s.max_abs);
  }
  const auto n = static_cast<double>(samples.size());
  r.rmse = std::sqrt(mse / n);
  r.nrmse = r.rmse / (std::sqrt(truth / n) + kNrmseEpsilon);
  r.boundary_rmse = std::sqrt(boundary / n);
  r.conserved_error = std::sqrt(conserved / n);
  r.fourier_rmse = std::sqrt(fourier / n);
  return r;
}

MetricsReport compute_metrics(const Tensor& pred, const Tensor& truth) {
  if (pred.shape() != truth.shape()) {
    throw ShapeError("metrics: prediction " + ad::shape_str(pred.shape()) + " vs truth " + ad::shape_str(truth.shape()));
  }
  if (pred.rank() < 4) throw ShapeError("metrics: expected [N, T+1, V, S...]");
  const ad::Shape one(pred.shape().begin() + 1, pred.shape().end());
  const std::size_t per = ad::shape_numel(one);
  std::vector<SampleStats> stats;
  for (std::size_t i = 0; i < pred.dim(0); ++i) {
    const auto p = pred.data().subspan(i * per, per);
    const auto t = truth.data().subspan(i * per, per);
    stats.push_back(sample_stats(Tensor(one, {p.begin(), p.end()}), Tensor(one, {t.begin(), t.end()})));
  }
  return aggregate(stats);
}

}  // namespace latefuse::eval
