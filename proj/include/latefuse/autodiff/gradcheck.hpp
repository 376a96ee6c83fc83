#pragma once

#include <functional>
#include <vector>

#include "latefuse/autodiff/variable.hpp"

namespace latefuse::ad {

using ScalarFunction = std::function<Variable(const std::vector<Variable>&)>;

/// Compares reverse-mode gradients of f at `point` against central
/// differences with step h. Returns the max over all coordinates of
///   |analytic - numeric| / max(1, |numeric|).
/// Throws ConfigError if h <= 0.
double finite_diff_check(const ScalarFunction& f, const std::vector<Tensor>& point, double h = 1e-5);

}  // namespace latefuse::ad
