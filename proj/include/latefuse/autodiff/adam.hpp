#pragma once

#include <cstdint>
#include <vector>

#include "latefuse/autodiff/variable.hpp"

namespace latefuse::ad {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. The learning rate is set from outside
/// (see training::scheduled_learning_rate); moments live alongside the
/// parameter list in registration order.
class Adam {
 public:
  Adam(std::vector<Variable> params, AdamOptions options = {});

  /// Applies one update from the parameters' accumulated gradients. Refuses
  /// (throws NonFiniteError, parameters untouched) if any gradient is NaN/Inf.
  void step();
  void zero_grad();

  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  double learning_rate() const { return options_.learning_rate; }
  std::int64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }

 private:
  std::vector<Variable> params_;
  std::vector<Tensor> first_moment_;
  std::vector<Tensor> second_moment_;
  AdamOptions options_;
  std::int64_t step_ = 0;
};

}  // namespace latefuse::ad
