#pragma once

#include "latefuse/operator/fno.hpp"

namespace latefuse::op {

/// Broadcasts beta [B, P] to constant fields [B, P, S...] matching `spatial`.
Tensor parameter_fields(const Tensor& beta, const Shape& spatial);

/// FNO that sees the parameters as extra constant input channels and
/// predicts the next state directly.
class BaselineFno {
 public:
  BaselineFno() = default;
  /// backbone.in_channels must equal state_vars + num_params and
  /// backbone.out_channels must equal state_vars.
  BaselineFno(const BackboneConfig& backbone, std::size_t state_vars, std::size_t num_params, std::uint64_t seed);

  /// u [B, V, S...], beta [B, P] -> next state [B, V, S...].
  Variable step(const Variable& u, const Tensor& beta) const;

  const FnoBackbone& backbone() const { return backbone_; }
  std::size_t state_vars() const { return state_vars_; }
  std::size_t num_params() const { return num_params_; }
  std::vector<NamedParameter> parameters() const { return backbone_.parameters(); }
  BaselineFno rebind(const std::vector<Variable>& params) const {
    BaselineFno copy = *this;
    copy.backbone_ = backbone_.rebind(params);
    return copy;
  }

 private:
  FnoBackbone backbone_;
  std::size_t state_vars_ = 1;
  std::size_t num_params_ = 1;
};

}  // namespace latefuse::op
