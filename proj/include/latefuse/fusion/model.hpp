#pragma once

#include "latefuse/fusion/library.hpp"
#include "latefuse/operator/fno.hpp"

namespace latefuse::fusion {

/// Backbone producing H hidden fields, a candidate library over (h, beta)
/// and the coefficient matrix xi [|terms|, V]. One step:
///   h = backbone(u), du = Theta(h, beta) xi, u_next = u + du.
class LateFusionModel {
 public:
  LateFusionModel() = default;
  /// backbone.in_channels must be V and backbone.out_channels the library's
  /// hidden arity. xi starts at zero.
  LateFusionModel(const op::BackboneConfig& backbone, LibrarySpec library, std::size_t state_vars, std::uint64_t seed);

  struct Forward {
    Variable hidden;  // [B, H, S...]
    Variable theta;   // [B, |terms|, S...]
    ResidualParts parts;
    Variable delta;   // parts.param_dependent + parts.param_free
    Variable next;    // u + delta
  };
  Forward forward(const Variable& u, const Tensor& beta) const;
  Variable step(const Variable& u, const Tensor& beta) const { return forward(u, beta).next; }

  const op::FnoBackbone& backbone() const { return backbone_; }
  const LibrarySpec& library() const { return library_; }
  const Variable& xi() const { return xi_; }
  std::size_t state_vars() const { return state_vars_; }

  /// Backbone parameters followed by "xi".
  std::vector<op::NamedParameter> parameters() const;
  LateFusionModel rebind(const std::vector<Variable>& params) const;

 private:
  op::FnoBackbone backbone_;
  LibrarySpec library_;
  Variable xi_;
  std::size_t state_vars_ = 1;
};

}  // namespace latefuse::fusion
