#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "latefuse/autodiff/variable.hpp"

// Differentiable primitives. Every op records its exact adjoint; shapes are
// checked eagerly and mismatches raise ShapeError. Field tensors use the
// layout [batch, channel, spatial...].
namespace latefuse::ad {

Variable add(const Variable& a, const Variable& b);
Variable sub(const Variable& a, const Variable& b);
Variable mul(const Variable& a, const Variable& b);
Variable neg(const Variable& a);
Variable scale(const Variable& a, double s);
Variable add_scalar(const Variable& a, double s);
Variable pow(const Variable& a, int exponent);
Variable sin(const Variable& a);
/// Exact GELU: 0.5 x (1 + erf(x / sqrt 2)).
Variable gelu(const Variable& a);

/// [m, k] x [k, n] -> [m, n].
Variable matmul(const Variable& a, const Variable& b);
Variable reshape(const Variable& a, Shape shape);
Variable concat(std::span<const Variable> parts, std::size_t axis);
Variable slice(const Variable& a, std::size_t axis, std::size_t begin, std::size_t count);

Variable sum(const Variable& a);
Variable mean(const Variable& a);
/// Sum of absolute values; the subgradient at 0 is 0.
Variable sum_abs(const Variable& a);

/// Pointwise channel contraction: x [B, Cin, S...], w [Cin, Cout] -> [B, Cout, S...].
Variable channel_linear(const Variable& x, const Variable& w);
/// x [B, C, S...] + bias [C] broadcast over batch and space.
Variable add_channel_bias(const Variable& x, const Variable& bias);
/// x [B, ...] scaled by s[b] per batch entry; s has shape [B].
Variable scale_per_sample(const Variable& x, const Variable& s);

/// Real FFT over the trailing `spatial_dims` axes (unnormalized):
/// [..., n] -> [..., n/2+1, 2] (with leading spatial axes transformed fully).
Variable rfft(const Variable& x, std::size_t spatial_dims);
/// Inverse of rfft with 1/n normalization per transformed axis.
Variable irfft(const Variable& spectrum, std::size_t spatial_dims, std::size_t out_len);

/// Complex mode mixing on a truncated spectrum.
///   spectrum [B, Cin, F..., 2] is viewed as [B, Cin, F, 2] (F = product of
///   spectral axes); weights [Cin, Cout, K, 2]; kept[m] is the flat spectral
///   index multiplied by weights[:, :, m]. Bins not listed are zero in the
///   output [B, Cout, F..., 2].
Variable spectral_mix(const Variable& spectrum, const Variable& weights,
                      std::span<const std::size_t> kept);

}  // namespace latefuse::ad
