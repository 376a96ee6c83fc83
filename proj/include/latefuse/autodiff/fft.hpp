#pragma once

#include <cstddef>
#include <vector>

#include "latefuse/autodiff/tensor.hpp"

// Raw (non-differentiable) discrete Fourier transforms on Tensor buffers.
//
// Convention: forward transforms are unnormalized,
//   X_k = sum_j x_j exp(-2 pi i j k / n),
// inverse transforms carry the 1/n factor so that inverse(forward(x)) = x.
// Complex values use a trailing axis of length 2 (re, im).
namespace latefuse::ad::fft {

/// Real-to-half-complex along the last axis: [..., n] -> [..., n/2+1, 2].
Tensor rfft_last(const Tensor& x);

/// Inverse of rfft_last: [..., n/2+1, 2] -> [..., n]. The imaginary parts of
/// the DC bin (and the Nyquist bin for even n) are ignored.
Tensor irfft_last(const Tensor& spectrum, std::size_t n);

/// Complex transform along `axis` of a complex tensor (trailing 2 excluded).
Tensor fft_axis(const Tensor& c, std::size_t axis, bool inverse);

/// Unnormalized backward sum Re(sum_{k<=n/2} G_k exp(+2 pi i j k / n)): the
/// adjoint of rfft_last.
Tensor rfft_last_adjoint(const Tensor& grad_spectrum, std::size_t n);

/// Adjoint of irfft_last: (c_k / n) * rfft_last(g), c_k = 2 on interior bins,
/// 1 on DC/Nyquist whose imaginary parts are zeroed.
Tensor irfft_last_adjoint(const Tensor& grad_out);

/// Multi-axis real transform over the trailing `spatial_dims` axes: real
/// transform on the last axis, complex transforms on the remaining ones.
Tensor rfftn(const Tensor& x, std::size_t spatial_dims);
Tensor irfftn(const Tensor& spectrum, std::size_t spatial_dims, std::size_t last_len);

/// Sum of |X_k|^2 over the full (two-sided) spectrum of every trailing
/// `spatial_dims`-dimensional block of x. Returns one value per block.
std::vector<double> full_spectrum_energy(const Tensor& x, std::size_t spatial_dims);

}  // namespace latefuse::ad::fft
