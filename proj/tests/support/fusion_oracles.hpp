#pragma once

#include "latefuse/fusion/model.hpp"
#include "support/operator_oracles.hpp"

namespace latefuse::testing {

// finite_diff_check of sum(Theta * weights) over the hidden fields, for a
// library exercising powers, products, sin and parameter monomials.
inline double library_gradient_error() {
  const auto spec = fusion::parse_library_spec("1, h0, h1^2, h0*h1, sin(h1), nu*h0^2, rho^2*sin(h0)*h1, nu*rho",
                                               {"nu", "rho"});
  const ad::Tensor beta({2, 2}, std::vector<double>{0.3, 0.7, 1.2, -0.4});
  const ad::Tensor w = random_field({2, spec.size(), 16}, 12);
  return ad::finite_diff_check(
      [&](const std::vector<ad::Variable>& v) {
        return ad::sum(ad::mul(fusion::evaluate_library(spec, v[0], beta), ad::Variable(w)));
      },
      {random_field({2, 2, 16}, 13)});
}

// Small late-fusion model on a 16-point grid with nonzero xi.
inline fusion::LateFusionModel small_late_fusion_model(std::size_t dims = 1) {
  op::BackboneConfig cfg;
  cfg.in_channels = 1;
  cfg.out_channels = 2;
  cfg.width = 3;
  cfg.modes = 3;
  cfg.spatial_dims = dims;
  fusion::LateFusionModel model(cfg, fusion::parse_library_spec("h0*beta, h1, beta^2*h0*h1, 1", {"beta"}), 1, 17);
  ad::Variable xi = model.xi();
  xi.set_value(random_field(xi.shape(), 18, 0.5));
  return model;
}

// finite_diff_check of a loss built on one late-fusion step, over every
// backbone weight and xi. `loss` maps (prediction, xi) to a scalar.
template <typename Loss>
double late_fusion_step_gradient_error(const Loss& loss) {
  const auto model = small_late_fusion_model();
  const ad::Tensor u = random_field({2, 1, 16}, 19);
  const ad::Tensor beta({2, 1}, std::vector<double>{0.25, 0.8});
  std::vector<ad::Tensor> point;
  for (const auto& p : model.parameters()) point.push_back(p.value.value());
  return ad::finite_diff_check(
      [&](const std::vector<ad::Variable>& v) {
        const auto m = model.rebind(v);
        return loss(m.step(ad::Variable(u), beta), v.back());
      },
      point);
}

}  // namespace latefuse::testing
