#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "latefuse/autodiff/variable.hpp"

namespace latefuse::op {

using ad::Shape;
using ad::Tensor;
using ad::Variable;

struct NamedParameter {
  std::string name;
  Variable value;
};

/// Flat indices into an rfft spectrum of `spatial` (last axis halved) for
/// the retained low modes. 1D keeps k < m. 2D keeps kx in [0, m) and
/// [Nx - m, Nx) with ky < m, so the weight index of a mode does not depend
/// on the grid resolution.
std::vector<std::size_t> kept_modes(const Shape& spatial, std::size_t modes);
/// Number of retained modes for `spatial_dims` dimensions.
std::size_t kept_mode_count(std::size_t spatial_dims, std::size_t modes);

class SpectralConv {
 public:
  SpectralConv() = default;
  SpectralConv(std::size_t in_channels, std::size_t out_channels, std::size_t spatial_dims,
               std::size_t modes, std::mt19937_64& rng);

  /// x [B, Cin, S...] -> [B, Cout, S...]; modes above the cutoff are dropped.
  Variable forward(const Variable& x) const;

  std::size_t in_channels() const { return in_; }
  std::size_t out_channels() const { return out_; }
  std::size_t modes() const { return modes_; }
  Variable& weights() { return weights_; }  // [Cin, Cout, K, 2]
  const Variable& weights() const { return weights_; }

 private:
  std::size_t in_ = 0, out_ = 0, dims_ = 1, modes_ = 0;
  Variable weights_;
};

struct BackboneConfig {
  std::size_t in_channels = 1;
  std::size_t out_channels = 2;
  std::size_t width = 16;
  std::size_t modes = 8;
  std::size_t levels = 4;
  std::size_t spatial_dims = 1;

  void validate() const;
  friend bool operator==(const BackboneConfig&, const BackboneConfig&) = default;
};

/// Lifting -> `levels` x (spectral conv + pointwise bypass -> GELU) -> projection.
class FnoBackbone {
 public:
  FnoBackbone() = default;
  FnoBackbone(const BackboneConfig& config, std::uint64_t seed);

  /// x [B, in_channels, S...] -> [B, out_channels, S...]. Throws
  /// NonFiniteError if any activation is NaN/Inf and ShapeError if the
  /// grid is too coarse for the retained modes.
  Variable forward(const Variable& x) const;

  const BackboneConfig& config() const { return config_; }
  std::vector<NamedParameter> parameters() const;
  /// Copy whose parameters are the given variables (order of parameters()).
  /// Used to differentiate with respect to externally owned leaves.
  FnoBackbone rebind(const std::vector<Variable>& params) const;

 private:
  std::vector<Variable*> slots();

  struct Pointwise {
    Variable weight;  // [in, out]
    Variable bias;    // [out]
  };
  static Pointwise make_pointwise(std::size_t in, std::size_t out, std::mt19937_64& rng);
  static Variable apply(const Pointwise& p, const Variable& x);

  BackboneConfig config_;
  Pointwise lift_;
  std::vector<SpectralConv> spectral_;
  std::vector<Pointwise> bypass_;
  Pointwise project_;
};

/// Raises NonFiniteError naming `where` if t has NaN/Inf entries.
void require_finite_activations(const Tensor& t, const std::string& where);

}  // namespace latefuse::op
