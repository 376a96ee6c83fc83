#include "latefuse/autodiff/ops.hpp"

#include <cmath>
#include <numbers>

#include "latefuse/autodiff/fft.hpp"
#include "latefuse/common/error.hpp"

namespace latefuse::ad {

namespace {

void require_same_shape(const Variable& a, const Variable& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

#ifdef LATEFUSE_CHECKED
void require_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) throw NonFiniteError(std::string(op) + ": non-finite input");
}
#else
void require_finite(const Tensor&, const char*) {}
#endif

template <typename F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = f(a[i]);
  return out;
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

// Product of shape entries in [begin, end).
std::size_t span_size(const Shape& s, std::size_t begin, std::size_t end) {
  std::size_t n = 1;
  for (std::size_t i = begin; i < end; ++i) n *= s[i];
  return n;
}

}  // namespace

Variable add(const Variable& a, const Variable& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] + b.value()[i];
  return Variable::make(std::move(out), {a, b}, [](Node& self) {
    parent(self, 0).accumulate(self.grad);
    parent(self, 1).accumulate(self.grad);
  });
}

Variable sub(const Variable& a, const Variable& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] - b.value()[i];
  return Variable::make(std::move(out), {a, b}, [](Node& self) {
    parent(self, 0).accumulate(self.grad);
    parent(self, 1).accumulate(map(self.grad, [](double g) { return -g; }));
  });
}

Variable mul(const Variable& a, const Variable& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] * b.value()[i];
  return Variable::make(std::move(out), {a, b}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) {
      Tensor g(self.grad.shape());
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] = self.grad[i] * pb.value[i];
      pa.accumulate(g);
    }
    if (pb.requires_grad) {
      Tensor g(self.grad.shape());
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] = self.grad[i] * pa.value[i];
      pb.accumulate(g);
    }
  });
}

Variable neg(const Variable& a) { return scale(a, -1.0); }

Variable scale(const Variable& a, double s) {
  return Variable::make(map(a.value(), [s](double v) { return s * v; }), {a}, [s](Node& self) {
    parent(self, 0).accumulate(map(self.grad, [s](double g) { return s * g; }));
  });
}

Variable add_scalar(const Variable& a, double s) {
  return Variable::make(map(a.value(), [s](double v) { return v + s; }), {a},
                        [](Node& self) { parent(self, 0).accumulate(self.grad); });
}

Variable pow(const Variable& a, int exponent) {
  if (exponent < 1) throw Error("pow: exponent must be >= 1");
  const auto ipow = [](double v, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= v;
    return r;
  };
  return Variable::make(map(a.value(), [&](double v) { return ipow(v, exponent); }), {a},
                        [exponent, ipow](Node& self) {
                          const Tensor& x = parent(self, 0).value;
                          Tensor g(x.shape());
                          for (std::size_t i = 0; i < g.numel(); ++i) {
                            g[i] = self.grad[i] * exponent * ipow(x[i], exponent - 1);
                          }
                          parent(self, 0).accumulate(g);
                        });
}

Variable sin(const Variable& a) {
  require_finite(a.value(), "sin");
  return Variable::make(map(a.value(), [](double v) { return std::sin(v); }), {a}, [](Node& self) {
    const Tensor& x = parent(self, 0).value;
    Tensor g(x.shape());
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] = self.grad[i] * std::cos(x[i]);
    parent(self, 0).accumulate(g);
  });
}

Variable gelu(const Variable& a) {
  require_finite(a.value(), "gelu");
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  Tensor out = map(a.value(), [&](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); });
  return Variable::make(std::move(out), {a}, [inv_sqrt_2pi](Node& self) {
    const Tensor& x = parent(self, 0).value;
    Tensor g(x.shape());
    for (std::size_t i = 0; i < g.numel(); ++i) {
      const double cdf = 0.5 * (1.0 + std::erf(x[i] * kInvSqrt2));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x[i] * x[i]);
      g[i] = self.grad[i] * (cdf + x[i] * pdf);
    }
    parent(self, 0).accumulate(g);
  });
}

Variable matmul(const Variable& a, const Variable& b) {
  if (a.value().rank() != 2 || b.value().rank() != 2 || a.shape()[1] != b.shape()[0]) {
    throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a.value()[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * b.value()[p * n + j];
    }
  return Variable::make(std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) {
      Tensor g({m, k});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += self.grad[i * n + j] * pb.value[p * n + j];
          g[i * k + p] = s;
        }
      pa.accumulate(g);
    }
    if (pb.requires_grad) {
      Tensor g({k, n});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double av = pa.value[i * k + p];
          for (std::size_t j = 0; j < n; ++j) g[p * n + j] += av * self.grad[i * n + j];
        }
      pb.accumulate(g);
    }
  });
}

Variable reshape(const Variable& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return Variable::make(std::move(out), {a}, [](Node& self) {
    parent(self, 0).accumulate(self.grad.reshaped(parent(self, 0).value.shape()));
  });
}

Variable concat(std::span<const Variable> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& ref = parts[0].shape();
  if (axis >= ref.size()) throw ShapeError("concat: axis out of range");
  std::size_t total = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != ref.size()) throw ShapeError("concat: rank mismatch");
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != ref[d]) throw ShapeError("concat: shape mismatch off the concat axis");
    }
    total += s[axis];
  }
  Shape out_shape = ref;
  out_shape[axis] = total;
  const std::size_t outer = span_size(ref, 0, axis);
  const std::size_t inner = span_size(ref, axis + 1, ref.size());
  Tensor out(out_shape);
  std::vector<std::size_t> widths;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.shape()[axis] * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(p.value().data().begin() + o * w, w,
                  out.data().begin() + o * total * inner + offset);
    }
    widths.push_back(w);
    offset += w;
  }
  std::vector<Variable> parents(parts.begin(), parts.end());
  return Variable::make(std::move(out), std::move(parents),
                        [outer, total, inner, widths](Node& self) {
                          std::size_t off = 0;
                          for (std::size_t i = 0; i < widths.size(); ++i) {
                            Node& p = parent(self, i);
                            if (p.requires_grad) {
                              Tensor g(p.value.shape());
                              for (std::size_t o = 0; o < outer; ++o) {
                                std::copy_n(self.grad.data().begin() + o * total * inner + off,
                                            widths[i], g.data().begin() + o * widths[i]);
                              }
                              p.accumulate(g);
                            }
                            off += widths[i];
                          }
                        });
}

Variable slice(const Variable& a, std::size_t axis, std::size_t begin, std::size_t count) {
  const Shape& s = a.shape();
  if (axis >= s.size() || begin + count > s[axis]) throw ShapeError("slice: out of range");
  const std::size_t outer = span_size(s, 0, axis);
  const std::size_t inner = span_size(s, axis + 1, s.size());
  const std::size_t full = s[axis];
  Shape out_shape = s;
  out_shape[axis] = count;
  Tensor out(out_shape);
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(a.value().data().begin() + (o * full + begin) * inner, count * inner,
                out.data().begin() + o * count * inner);
  }
  return Variable::make(std::move(out), {a}, [outer, inner, full, begin, count](Node& self) {
    Node& p = parent(self, 0);
    Tensor g(p.value.shape());
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(self.grad.data().begin() + o * count * inner, count * inner,
                  g.data().begin() + (o * full + begin) * inner);
    }
    p.accumulate(g);
  });
}

Variable sum(const Variable& a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return Variable::make(Tensor::scalar(s), {a}, [](Node& self) {
    Node& p = parent(self, 0);
    p.accumulate(Tensor(p.value.shape(), self.grad[0]));
  });
}

Variable mean(const Variable& a) {
  if (a.numel() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Variable sum_abs(const Variable& a) {
  double s = 0.0;
  for (double v : a.value().data()) s += std::abs(v);
  return Variable::make(Tensor::scalar(s), {a}, [](Node& self) {
    Node& p = parent(self, 0);
    Tensor g(p.value.shape());
    for (std::size_t i = 0; i < g.numel(); ++i) {
      const double v = p.value[i];
      g[i] = v > 0.0 ? self.grad[0] : (v < 0.0 ? -self.grad[0] : 0.0);
    }
    p.accumulate(g);
  });
}

Variable channel_linear(const Variable& x, const Variable& w) {
  const Shape& xs = x.shape();
  if (xs.size() < 2 || w.value().rank() != 2 || w.shape()[0] != xs[1]) {
    throw ShapeError("channel_linear: x " + shape_str(xs) + " incompatible with w " +
                     shape_str(w.shape()));
  }
  require_finite(x.value(), "channel_linear");
  const std::size_t batch = xs[0], cin = xs[1], cout = w.shape()[1];
  const std::size_t space = span_size(xs, 2, xs.size());
  Shape out_shape = xs;
  out_shape[1] = cout;
  Tensor out(out_shape);
  const double* xv = x.value().data().data();
  const double* wv = w.value().data().data();
  double* ov = out.data().data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < cout; ++o) {
      double* dst = ov + (b * cout + o) * space;
      for (std::size_t i = 0; i < cin; ++i) {
        const double wio = wv[i * cout + o];
        const double* src = xv + (b * cin + i) * space;
        for (std::size_t s = 0; s < space; ++s) dst[s] += wio * src[s];
      }
    }
  return Variable::make(std::move(out), {x, w}, [batch, cin, cout, space](Node& self) {
    Node& px = parent(self, 0);
    Node& pw = parent(self, 1);
    const double* gv = self.grad.data().data();
    if (px.requires_grad) {
      Tensor g(px.value.shape());
      const double* wv = pw.value.data().data();
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < cin; ++i) {
          double* dst = g.data().data() + (b * cin + i) * space;
          for (std::size_t o = 0; o < cout; ++o) {
            const double wio = wv[i * cout + o];
            const double* src = gv + (b * cout + o) * space;
            for (std::size_t s = 0; s < space; ++s) dst[s] += wio * src[s];
          }
        }
      px.accumulate(g);
    }
    if (pw.requires_grad) {
      Tensor g(pw.value.shape());
      const double* xv = px.value.data().data();
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < cin; ++i) {
          const double* xs = xv + (b * cin + i) * space;
          for (std::size_t o = 0; o < cout; ++o) {
            const double* gs = gv + (b * cout + o) * space;
            double acc = 0.0;
            for (std::size_t s = 0; s < space; ++s) acc += xs[s] * gs[s];
            g[i * cout + o] += acc;
          }
        }
      pw.accumulate(g);
    }
  });
}

Variable add_channel_bias(const Variable& x, const Variable& bias) {
  const Shape& xs = x.shape();
  if (xs.size() < 2 || bias.value().rank() != 1 || bias.shape()[0] != xs[1]) {
    throw ShapeError("add_channel_bias: x " + shape_str(xs) + " incompatible with bias " +
                     shape_str(bias.shape()));
  }
  const std::size_t batch = xs[0], channels = xs[1];
  const std::size_t space = span_size(xs, 2, xs.size());
  Tensor out = x.value();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < channels; ++c) {
      const double bc = bias.value()[c];
      for (std::size_t s = 0; s < space; ++s) out[(b * channels + c) * space + s] += bc;
    }
  return Variable::make(std::move(out), {x, bias}, [batch, channels, space](Node& self) {
    parent(self, 0).accumulate(self.grad);
    Node& pb = parent(self, 1);
    if (pb.requires_grad) {
      Tensor g({channels});
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < channels; ++c)
          for (std::size_t s = 0; s < space; ++s) g[c] += self.grad[(b * channels + c) * space + s];
      pb.accumulate(g);
    }
  });
}

Variable scale_per_sample(const Variable& x, const Variable& s) {
  const Shape& xs = x.shape();
  if (xs.empty() || s.value().rank() != 1 || s.shape()[0] != xs[0]) {
    throw ShapeError("scale_per_sample: x " + shape_str(xs) + " incompatible with s " +
                     shape_str(s.shape()));
  }
  const std::size_t batch = xs[0];
  const std::size_t block = x.numel() / std::max<std::size_t>(batch, 1);
  Tensor out(xs);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < block; ++i) out[b * block + i] = x.value()[b * block + i] * s.value()[b];
  return Variable::make(std::move(out), {x, s}, [batch, block](Node& self) {
    Node& px = parent(self, 0);
    Node& ps = parent(self, 1);
    if (px.requires_grad) {
      Tensor g(px.value.shape());
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < block; ++i) g[b * block + i] = self.grad[b * block + i] * ps.value[b];
      px.accumulate(g);
    }
    if (ps.requires_grad) {
      Tensor g({batch});
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < block; ++i) g[b] += self.grad[b * block + i] * px.value[b * block + i];
      ps.accumulate(g);
    }
  });
}

Variable rfft(const Variable& x, std::size_t spatial_dims) {
  if (spatial_dims == 0 || spatial_dims > x.value().rank()) throw ShapeError("rfft: axis out of range");
  require_finite(x.value(), "rfft");
  const std::size_t n = x.shape().back();
  const std::size_t rank = x.value().rank();
  Tensor out = fft::rfftn(x.value(), spatial_dims);
  return Variable::make(std::move(out), {x}, [spatial_dims, n, rank](Node& self) {
    // Adjoint of a forward complex transform is the unnormalized backward one.
    Tensor g = self.grad;
    for (std::size_t d = spatial_dims - 1; d >= 1; --d) {
      const std::size_t axis = rank - 1 - d;
      const double len = static_cast<double>(g.shape()[axis]);
      g = fft::fft_axis(g, axis, /*inverse=*/true);
      for (auto& v : g.data()) v *= len;
    }
    parent(self, 0).accumulate(fft::rfft_last_adjoint(g, n));
  });
}

Variable irfft(const Variable& spectrum, std::size_t spatial_dims, std::size_t out_len) {
  const std::size_t real_rank = spectrum.value().rank() - 1;
  if (spatial_dims == 0 || spatial_dims > real_rank) throw ShapeError("irfft: axis out of range");
  Tensor out = fft::irfftn(spectrum.value(), spatial_dims, out_len);
  return Variable::make(std::move(out), {spectrum}, [spatial_dims, real_rank](Node& self) {
    Tensor g = fft::irfft_last_adjoint(self.grad);
    for (std::size_t d = 1; d < spatial_dims; ++d) {
      const std::size_t axis = real_rank - 1 - d;
      const double inv_len = 1.0 / static_cast<double>(g.shape()[axis]);
      g = fft::fft_axis(g, axis, /*inverse=*/false);
      for (auto& v : g.data()) v *= inv_len;
    }
    parent(self, 0).accumulate(g);
  });
}

Variable spectral_mix(const Variable& spectrum, const Variable& weights,
                      std::span<const std::size_t> kept) {
  const Shape& ss = spectrum.shape();
  const Shape& ws = weights.shape();
  if (ss.size() < 4 || ss.back() != 2 || ws.size() != 4 || ws[3] != 2 || ws[0] != ss[1] ||
      ws[2] != kept.size()) {
    throw ShapeError("spectral_mix: spectrum " + shape_str(ss) + " incompatible with weights " +
                     shape_str(ws));
  }
  const std::size_t batch = ss[0], cin = ss[1], cout = ws[1], modes = ws[2];
  const std::size_t bins = span_size(ss, 2, ss.size() - 1);
  for (std::size_t k : kept) {
    if (k >= bins) throw ShapeError("spectral_mix: kept mode index out of range");
  }
  std::vector<std::size_t> kept_idx(kept.begin(), kept.end());
  Shape out_shape = ss;
  out_shape[1] = cout;
  Tensor out(out_shape);
  const Tensor& xv = spectrum.value();
  const Tensor& wv = weights.value();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t i = 0; i < cin; ++i)
        for (std::size_t m = 0; m < modes; ++m) {
          const std::size_t xi = ((b * cin + i) * bins + kept_idx[m]) * 2;
          const std::size_t wi = ((i * cout + o) * modes + m) * 2;
          const std::size_t oi = ((b * cout + o) * bins + kept_idx[m]) * 2;
          const double xr = xv[xi], xim = xv[xi + 1], wr = wv[wi], wim = wv[wi + 1];
          out[oi] += xr * wr - xim * wim;
          out[oi + 1] += xr * wim + xim * wr;
        }
  return Variable::make(
      std::move(out), {spectrum, weights},
      [batch, cin, cout, modes, bins, kept_idx = std::move(kept_idx)](Node& self) {
        Node& px = parent(self, 0);
        Node& pw = parent(self, 1);
        const Tensor& g = self.grad;
        // With G = dL/dRe + i dL/dIm: dL/dx = conj(w) G, dL/dw = conj(x) G.
        if (px.requires_grad) {
          Tensor gx(px.value.shape());
          for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t o = 0; o < cout; ++o)
              for (std::size_t i = 0; i < cin; ++i)
                for (std::size_t m = 0; m < modes; ++m) {
                  const std::size_t xi = ((b * cin + i) * bins + kept_idx[m]) * 2;
                  const std::size_t wi = ((i * cout + o) * modes + m) * 2;
                  const std::size_t oi = ((b * cout + o) * bins + kept_idx[m]) * 2;
                  const double gr = g[oi], gim = g[oi + 1];
                  const double wr = pw.value[wi], wim = pw.value[wi + 1];
                  gx[xi] += wr * gr + wim * gim;
                  gx[xi + 1] += wr * gim - wim * gr;
                }
          px.accumulate(gx);
        }
        if (pw.requires_grad) {
          Tensor gw(pw.value.shape());
          for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t o = 0; o < cout; ++o)
              for (std::size_t i = 0; i < cin; ++i)
                for (std::size_t m = 0; m < modes; ++m) {
                  const std::size_t xi = ((b * cin + i) * bins + kept_idx[m]) * 2;
                  const std::size_t wi = ((i * cout + o) * modes + m) * 2;
                  const std::size_t oi = ((b * cout + o) * bins + kept_idx[m]) * 2;
                  const double gr = g[oi], gim = g[oi + 1];
                  const double xr = px.value[xi], xim = px.value[xi + 1];
                  gw[wi] += xr * gr + xim * gim;
                  gw[wi + 1] += xr * gim - xim * gr;
                }
          pw.accumulate(gw);
        }
      });
}

}  // namespace latefuse::ad
