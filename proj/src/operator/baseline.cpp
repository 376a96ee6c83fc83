#include "latefuse/operator/baseline.hpp"

#include <array>

#include "latefuse/autodiff/ops.hpp"
#include "latefuse/common/error.hpp"

namespace latefuse::op {

Tensor parameter_fields(const Tensor& beta, const Shape& spatial) {
  if (beta.rank() != 2) throw ShapeError("parameter_fields: beta must be [B, P]");
  const std::size_t batch = beta.dim(0), p = beta.dim(1), space = ad::shape_numel(spatial);
  Shape shape{batch, p};
  shape.insert(shape.end(), spatial.begin(), spatial.end());
  Tensor out(shape);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t k = 0; k < p; ++k) {
      const double v = beta[b * p + k];
      std::fill_n(out.data().begin() + (b * p + k) * space, space, v);
    }
  return out;
}

BaselineFno::BaselineFno(const BackboneConfig& backbone, std::size_t state_vars, std::size_t num_params,
                         std::uint64_t seed)
    : state_vars_(state_vars), num_params_(num_params) {
  if (backbone.in_channels != state_vars + num_params || backbone.out_channels != state_vars) {
    throw ConfigError("baseline: backbone must map V + P channels to V channels");
  }
  backbone_ = FnoBackbone(backbone, seed);
}

Variable BaselineFno::step(const Variable& u, const Tensor& beta) const {
  const Shape& us = u.shape();
  if (us.size() < 3 || us[1] != state_vars_) throw ShapeError("baseline: state " + ad::shape_str(us) + " has wrong layout");
  if (beta.rank() != 2 || beta.dim(0) != us[0] || beta.dim(1) != num_params_) {
    throw ShapeError("baseline: beta " + ad::shape_str(beta.shape()) + " does not match the batch");
  }
  const Shape spatial(us.begin() + 2, us.end());
  const std::array<Variable, 2> parts{u, Variable(parameter_fields(beta, spatial))};
  return backbone_.forward(ad::concat(parts, 1));
}

}  // namespace latefuse::op
