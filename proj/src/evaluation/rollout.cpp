#include "latefuse/evaluation/rollout.hpp"

#include <cmath>
#include <limits>

#include "latefuse/common/error.hpp"
#include "latefuse/common/parallel.hpp"

namespace latefuse::eval {

namespace {

constexpr std::size_t kRolloutBatch = 32;

ad::Shape with_leading(std::size_t n, const ad::Shape& shape) {
  ad::Shape out{n};
  out.insert(out.end(), shape.begin(), shape.end());
  return out;
}

}  // namespace

RolloutResult rollout(const train::Surrogate& model, const Tensor& u0, std::span<const double> beta, std::size_t steps) {
  ad::NoGradGuard guard;
  const std::size_t frame = u0.numel();
  RolloutResult r{Tensor(with_leading(steps + 1, u0.shape())), std::nullopt};
  std::copy(u0.data().begin(), u0.data().end(), r.predicted.data().begin());
  Tensor u = u0.reshaped(with_leading(1, u0.shape()));
  const Tensor b({1, beta.size()}, std::vector<double>(beta.begin(), beta.end()));
  for (std::size_t s = 1; s <= steps; ++s) {
    bool finite = true;
    try {
      u = model.step(ad::Variable(u), b).value();
      finite = u.all_finite();
    } catch (const NonFiniteError&) {
      finite = false;
    }
    if (!finite) {
      r.blowup_step = s;
      std::fill(r.predicted.data().begin() + s * frame, r.predicted.data().end(),
                std::numeric_limits<double>::quiet_NaN());
      break;
    }
    std::copy(u.data().begin(), u.data().end(), r.predicted.data().begin() + s * frame);
  }
  return r;
}

std::vector<RolloutResult> rollout_dataset(const train::Surrogate& model, const pde::Dataset& ds) {
  const std::size_t n = ds.trajectories.size();
  std::vector<RolloutResult> out(n);
  if (n == 0) return out;
  const std::size_t steps = ds.manifest.grid.num_steps();
  const std::size_t groups = (n + kRolloutBatch - 1) / kRolloutBatch;
  parallel_for(groups, [&](std::size_t g) {
    ad::NoGradGuard guard;
    const std::size_t begin = g * kRolloutBatch, end = std::min(n, begin + kRolloutBatch);
    const std::size_t count = end - begin;
    const auto& first = ds.trajectories[begin].states;
    const ad::Shape frame_shape(first.shape().begin() + 1, first.shape().end());
    const std::size_t frame = ad::shape_numel(frame_shape);
    const std::size_t p = ds.trajectories[begin].params.size();
    Tensor u(with_leading(count, frame_shape));
    Tensor beta({count, p});
    for (std::size_t i = 0; i < count; ++i) {
      const auto& traj = ds.trajectories[begin + i];
      std::copy_n(traj.states.data().begin(), frame, u.data().begin() + i * frame);
      std::copy(traj.params.begin(), traj.params.end(), beta.data().begin() + i * p);
      out[begin + i].predicted = Tensor(with_leading(steps + 1, frame_shape));
      std::copy_n(traj.states.data().begin(), frame, out[begin + i].predicted.data().begin());
    }
    try {
      for (std::size_t s = 1; s <= steps; ++s) {
        u = model.step(ad::Variable(u), beta).value();
        if (!u.all_finite()) throw NonFiniteError("rollout: non-finite state");
        for (std::size_t i = 0; i < count; ++i) {
          std::copy_n(u.data().begin() + i * frame, frame, out[begin + i].predicted.data().begin() + s * frame);
        }
      }
    } catch (const NonFiniteError&) {
      // Locate the offending trajectories one by one.
      for (std::size_t i = 0; i < count; ++i) {
        const auto& traj = ds.trajectories[begin + i];
        const Tensor u0(frame_shape, std::vector<double>(traj.states.data().begin(), traj.states.data().begin() + frame));
        out[begin + i] = rollout(model, u0, traj.params, steps);
      }
    }
  });
  return out;
}

SplitEvaluation evaluate_rollouts(const std::vector<RolloutResult>& rollouts, const pde::Dataset& ds) {
  if (rollouts.size() != ds.trajectories.size()) throw ShapeError("evaluate: rollout count differs from dataset");
  SplitEvaluation ev;
  std::vector<SampleStats> stats;
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    const auto& r = rollouts[i];
    if (r.blowup_step) ev.blowups.push_back(i);
    const SampleStats s = sample_stats(r.predicted, ds.trajectories[i].states, r.finite_snapshots());
    stats.push_back(s);
    ev.per_trajectory.push_back(aggregate(std::span<const SampleStats>(&stats.back(), 1)));
  }
  ev.metrics = aggregate(stats);
  return ev;
}

SplitEvaluation evaluate_split(const train::Surrogate& model, const pde::Dataset& ds) {
  return evaluate_rollouts(rollout_dataset(model, ds), ds);
}

}  // namespace latefuse::eval
