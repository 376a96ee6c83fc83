#include "latefuse/autodiff/fft.hpp"

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>

#include "latefuse/common/error.hpp"

namespace latefuse::ad::fft {

namespace {

enum class PlanKind { kR2C, kC2R, kForward, kBackward };

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per (kind, n) and never destroyed.
fftw_plan get_plan(PlanKind kind, std::size_t n) {
  static std::mutex mutex;
  static std::map<std::pair<PlanKind, std::size_t>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(kind, n);
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::vector<double> real(n + 2);
  std::vector<std::complex<double>> cplx(n + 1);
  auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
  std::vector<std::complex<double>> cplx2(n + 1);
  auto* c2 = reinterpret_cast<fftw_complex*>(cplx2.data());
  fftw_plan plan = nullptr;
  switch (kind) {
    case PlanKind::kR2C: plan = fftw_plan_dft_r2c_1d(len, real.data(), c, flags); break;
    case PlanKind::kC2R: plan = fftw_plan_dft_c2r_1d(len, c, real.data(), flags); break;
    case PlanKind::kForward: plan = fftw_plan_dft_1d(len, c, c2, FFTW_FORWARD, flags); break;
    case PlanKind::kBackward: plan = fftw_plan_dft_1d(len, c, c2, FFTW_BACKWARD, flags); break;
  }
  if (!plan) throw Error("FFTW planning failed for n=" + std::to_string(n));
  plans.emplace(key, plan);
  return plan;
}

void require_complex(const Tensor& c, const char* what) {
  if (c.rank() < 2 || c.shape().back() != 2) {
    throw ShapeError(std::string(what) + ": expected trailing complex axis of length 2, got " +
                     shape_str(c.shape()));
  }
}

}  // namespace

Tensor rfft_last(const Tensor& x) {
  if (x.rank() < 1) throw ShapeError("rfft: rank-0 input");
  const std::size_t n = x.shape().back();
  if (n == 0) throw ShapeError("rfft: empty axis");
  const std::size_t m = n / 2 + 1;
  const std::size_t rows = x.numel() / n;
  Shape out_shape = x.shape();
  out_shape.back() = m;
  out_shape.push_back(2);
  Tensor out(out_shape);
  fftw_plan plan = get_plan(PlanKind::kR2C, n);
  std::vector<double> in(n);
  std::vector<std::complex<double>> spec(m);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(x.data().begin() + r * n, n, in.begin());
    fftw_execute_dft_r2c(plan, in.data(), reinterpret_cast<fftw_complex*>(spec.data()));
    for (std::size_t k = 0; k < m; ++k) {
      out[(r * m + k) * 2] = spec[k].real();
      out[(r * m + k) * 2 + 1] = spec[k].imag();
    }
  }
  return out;
}

Tensor irfft_last(const Tensor& spectrum, std::size_t n) {
  require_complex(spectrum, "irfft");
  const std::size_t m = spectrum.shape()[spectrum.rank() - 2];
  if (n == 0 || m != n / 2 + 1) {
    throw ShapeError("irfft: half-spectrum length " + std::to_string(m) + " inconsistent with n=" +
                     std::to_string(n));
  }
  const std::size_t rows = spectrum.numel() / (2 * m);
  Shape out_shape(spectrum.shape().begin(), spectrum.shape().end() - 1);
  out_shape.back() = n;
  Tensor out(out_shape);
  fftw_plan plan = get_plan(PlanKind::kC2R, n);
  std::vector<std::complex<double>> spec(m);
  std::vector<double> real(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < m; ++k) {
      spec[k] = {spectrum[(r * m + k) * 2], spectrum[(r * m + k) * 2 + 1]};
    }
    spec[0].imag(0.0);
    if (n % 2 == 0) spec[m - 1].imag(0.0);
    fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(spec.data()), real.data());
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] = real[j] * inv_n;
  }
  return out;
}

Tensor fft_axis(const Tensor& c, std::size_t axis, bool inverse) {
  require_complex(c, "fft");
  if (axis + 1 >= c.rank()) throw ShapeError("fft: axis out of range");
  const std::size_t n = c.shape()[axis];
  std::size_t outer = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= c.shape()[a];
  std::size_t inner = 1;  // complex elements after `axis`
  for (std::size_t a = axis + 1; a + 1 < c.rank(); ++a) inner *= c.shape()[a];
  Tensor out(c.shape());
  fftw_plan plan = get_plan(inverse ? PlanKind::kBackward : PlanKind::kForward, n);
  std::vector<std::complex<double>> in(n), res(n);
  const double scale = inverse ? 1.0 / static_cast<double>(n) : 1.0;
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = ((o * n + j) * inner + i) * 2;
        in[j] = {c[idx], c[idx + 1]};
      }
      fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                       reinterpret_cast<fftw_complex*>(res.data()));
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = ((o * n + j) * inner + i) * 2;
        out[idx] = res[j].real() * scale;
        out[idx + 1] = res[j].imag() * scale;
      }
    }
  }
  return out;
}

Tensor rfft_last_adjoint(const Tensor& grad_spectrum, std::size_t n) {
  require_complex(grad_spectrum, "rfft adjoint");
  const std::size_t m = grad_spectrum.shape()[grad_spectrum.rank() - 2];
  if (m != n / 2 + 1) throw ShapeError("rfft adjoint: inconsistent half-spectrum length");
  const std::size_t rows = grad_spectrum.numel() / (2 * m);
  Shape out_shape(grad_spectrum.shape().begin(), grad_spectrum.shape().end() - 1);
  out_shape.back() = n;
  Tensor out(out_shape);
  fftw_plan plan = get_plan(PlanKind::kBackward, n);
  std::vector<std::complex<double>> full(n), res(n);
  for (std::size_t r = 0; r < rows; ++r) {
    std::fill(full.begin(), full.end(), std::complex<double>{});
    for (std::size_t k = 0; k < m; ++k) {
      full[k] = {grad_spectrum[(r * m + k) * 2], grad_spectrum[(r * m + k) * 2 + 1]};
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(full.data()),
                     reinterpret_cast<fftw_complex*>(res.data()));
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] = res[j].real();
  }
  return out;
}

Tensor irfft_last_adjoint(const Tensor& grad_out) {
  const std::size_t n = grad_out.shape().back();
  Tensor g = rfft_last(grad_out);
  const std::size_t m = n / 2 + 1;
  const std::size_t rows = g.numel() / (2 * m);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < m; ++k) {
      const bool edge = k == 0 || (n % 2 == 0 && k == m - 1);
      const double c = edge ? inv_n : 2.0 * inv_n;
      g[(r * m + k) * 2] *= c;
      g[(r * m + k) * 2 + 1] = edge ? 0.0 : g[(r * m + k) * 2 + 1] * c;
    }
  }
  return g;
}

Tensor rfftn(const Tensor& x, std::size_t spatial_dims) {
  if (spatial_dims == 0 || spatial_dims > x.rank()) throw ShapeError("rfftn: bad spatial_dims");
  Tensor c = rfft_last(x);
  // complex tensor rank = x.rank() + 1; spatial axes are x.rank()-spatial_dims .. x.rank()-1
  for (std::size_t d = 1; d < spatial_dims; ++d) {
    c = fft_axis(c, x.rank() - 1 - d, /*inverse=*/false);
  }
  return c;
}

Tensor irfftn(const Tensor& spectrum, std::size_t spatial_dims, std::size_t last_len) {
  require_complex(spectrum, "irfftn");
  const std::size_t real_rank = spectrum.rank() - 1;
  if (spatial_dims == 0 || spatial_dims > real_rank) throw ShapeError("irfftn: bad spatial_dims");
  Tensor c = spectrum;
  for (std::size_t d = spatial_dims - 1; d >= 1; --d) {
    c = fft_axis(c, real_rank - 1 - d, /*inverse=*/true);
  }
  return irfft_last(c, last_len);
}

std::vector<double> full_spectrum_energy(const Tensor& x, std::size_t spatial_dims) {
  const Tensor c = rfftn(x, spatial_dims);
  const std::size_t n = x.shape().back();
  const std::size_t m = n / 2 + 1;
  std::size_t block = 1;
  for (std::size_t d = 0; d < spatial_dims; ++d) block *= x.shape()[x.rank() - 1 - d];
  const std::size_t blocks = x.numel() / block;
  const std::size_t half_block = block / n * m;
  std::vector<double> energy(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    double e = 0.0;
    for (std::size_t q = 0; q < half_block; ++q) {
      const std::size_t k = q % m;
      const bool edge = k == 0 || (n % 2 == 0 && k == m - 1);
      const double re = c[(b * half_block + q) * 2];
      const double im = c[(b * half_block + q) * 2 + 1];
      e += (edge ? 1.0 : 2.0) * (re * re + im * im);
    }
    energy[b] = e;
  }
  return energy;
}

}  // namespace latefuse::ad::fft
