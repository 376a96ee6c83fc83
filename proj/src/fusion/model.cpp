#include "latefuse/fusion/model.hpp"

#include "latefuse/autodiff/ops.hpp"
#include "latefuse/common/error.hpp"

namespace latefuse::fusion {

LateFusionModel::LateFusionModel(const op::BackboneConfig& backbone, LibrarySpec library, std::size_t state_vars,
                                 std::uint64_t seed)
    : library_(std::move(library)), state_vars_(state_vars) {
  library_.validate();
  if (backbone.in_channels != state_vars) throw ConfigError("late fusion: backbone input must have V channels");
  if (backbone.out_channels != library_.hidden_arity) {
    throw ConfigError("late fusion: backbone emits " + std::to_string(backbone.out_channels) +
                      " hidden states but the library uses " + std::to_string(library_.hidden_arity));
  }
  backbone_ = op::FnoBackbone(backbone, seed);
  xi_ = Variable(Tensor({library_.size(), state_vars_}), true);
}

LateFusionModel::Forward LateFusionModel::forward(const Variable& u, const Tensor& beta) const {
  if (u.shape().size() < 3 || u.shape()[1] != state_vars_) {
    throw ShapeError("late fusion: state " + ad::shape_str(u.shape()) + " has wrong layout");
  }
  Forward f;
  f.hidden = backbone_.forward(u);
  f.theta = evaluate_library(library_, f.hidden, beta);
  f.parts = residual_parts(library_, f.theta, xi_);
  f.delta = ad::add(f.parts.param_dependent, f.parts.param_free);
  f.next = ad::add(u, f.delta);
  return f;
}

std::vector<op::NamedParameter> LateFusionModel::parameters() const {
  auto params = backbone_.parameters();
  params.push_back({"xi", xi_});
  return params;
}

LateFusionModel LateFusionModel::rebind(const std::vector<Variable>& params) const {
  if (params.empty() || params.back().shape() != xi_.shape()) throw ShapeError("late fusion: rebind needs xi last");
  LateFusionModel copy = *this;
  copy.backbone_ = backbone_.rebind(std::vector<Variable>(params.begin(), params.end() - 1));
  copy.xi_ = params.back();
  return copy;
}

}  // namespace latefuse::fusion
