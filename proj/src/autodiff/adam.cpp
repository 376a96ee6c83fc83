#include "latefuse/autodiff/adam.hpp"

#include <cmath>

#include "latefuse/common/error.hpp"

namespace latefuse::ad {

Adam::Adam(std::vector<Variable> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const auto& p : params_) {
    first_moment_.emplace_back(p.shape());
    second_moment_.emplace_back(p.shape());
  }
}

void Adam::step() {
  std::vector<Tensor> grads;
  grads.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    grads.push_back(params_[i].grad());
    if (!grads.back().all_finite()) {
      throw NonFiniteError("adam: non-finite gradient in parameter " + std::to_string(i) +
                           "; step refused");
    }
  }
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& value = params_[i].mutable_value();
    Tensor& m = first_moment_[i];
    Tensor& v = second_moment_[i];
    const Tensor& g = grads[i];
    for (std::size_t j = 0; j < value.numel(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      value[j] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace latefuse::ad
