#include "latefuse/operator/fno.hpp"

#include <cmath>

#include "latefuse/autodiff/ops.hpp"
#include "latefuse/common/error.hpp"

namespace latefuse::op {

std::size_t kept_mode_count(std::size_t spatial_dims, std::size_t modes) {
  return spatial_dims == 1 ? modes : 2 * modes * modes;
}

std::vector<std::size_t> kept_modes(const Shape& spatial, std::size_t modes) {
  if (spatial.size() == 1) {
    if (modes > spatial[0] / 2 + 1) {
      throw ShapeError("spectral conv: " + std::to_string(modes) + " modes exceed the " +
                       std::to_string(spatial[0]) + "-point grid");
    }
    std::vector<std::size_t> kept(modes);
    for (std::size_t k = 0; k < modes; ++k) kept[k] = k;
    return kept;
  }
  if (spatial.size() == 2) {
    const std::size_t nx = spatial[0], half = spatial[1] / 2 + 1;
    if (2 * modes > nx || modes > half) {
      throw ShapeError("spectral conv: " + std::to_string(modes) + " modes exceed the " +
                       ad::shape_str(spatial) + " grid");
    }
    std::vector<std::size_t> kept;
    kept.reserve(2 * modes * modes);
    for (std::size_t j = 0; j < 2 * modes; ++j) {
      const std::size_t kx = j < modes ? j : nx - 2 * modes + j;
      for (std::size_t ky = 0; ky < modes; ++ky) kept.push_back(kx * half + ky);
    }
    return kept;
  }
  throw ShapeError("spectral conv: only 1D and 2D grids are supported");
}

SpectralConv::SpectralConv(std::size_t in_channels, std::size_t out_channels, std::size_t spatial_dims,
                           std::size_t modes, std::mt19937_64& rng)
    : in_(in_channels), out_(out_channels), dims_(spatial_dims), modes_(modes) {
  const std::size_t k = kept_mode_count(spatial_dims, modes);
  Tensor w({in_, out_, k, 2});
  const double scale = 1.0 / static_cast<double>(in_ * out_);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& v : w.data()) v = scale * unit(rng);
  weights_ = Variable(std::move(w), true);
}

Variable SpectralConv::forward(const Variable& x) const {
  const Shape& xs = x.shape();
  if (xs.size() != 2 + dims_ || xs[1] != in_) {
    throw ShapeError("spectral conv: input " + ad::shape_str(xs) + " does not have " + std::to_string(in_) +
                     " channels over " + std::to_string(dims_) + " spatial dims");
  }
  const Shape spatial(xs.begin() + 2, xs.end());
  const auto kept = kept_modes(spatial, modes_);
  const Variable spectrum = ad::rfft(x, dims_);
  const Variable mixed = ad::spectral_mix(spectrum, weights_, kept);
  return ad::irfft(mixed, dims_, spatial.back());
}

void BackboneConfig::validate() const {
  if (in_channels == 0 || out_channels == 0 || width == 0) throw ConfigError("backbone: channel counts must be >= 1");
  if (modes == 0) throw ConfigError("backbone: modes must be >= 1");
  if (levels != 4) throw ConfigError("backbone: level count is fixed at 4");
  if (spatial_dims != 1 && spatial_dims != 2) throw ConfigError("backbone: spatial_dims must be 1 or 2");
}

void require_finite_activations(const Tensor& t, const std::string& where) {
  if (!t.all_finite()) throw NonFiniteError(where + ": non-finite activation");
}

FnoBackbone::Pointwise FnoBackbone::make_pointwise(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor w({in, out});
  for (auto& v : w.data()) v = dist(rng);
  Tensor b({out});
  for (auto& v : b.data()) v = dist(rng);
  return {Variable(std::move(w), true), Variable(std::move(b), true)};
}

Variable FnoBackbone::apply(const Pointwise& p, const Variable& x) {
  return ad::add_channel_bias(ad::channel_linear(x, p.weight), p.bias);
}

FnoBackbone::FnoBackbone(const BackboneConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  lift_ = make_pointwise(config_.in_channels, config_.width, rng);
  for (std::size_t l = 0; l < config_.levels; ++l) {
    spectral_.emplace_back(config_.width, config_.width, config_.spatial_dims, config_.modes, rng);
    bypass_.push_back(make_pointwise(config_.width, config_.width, rng));
  }
  project_ = make_pointwise(config_.width, config_.out_channels, rng);
}

Variable FnoBackbone::forward(const Variable& x) const {
  if (x.shape().size() != 2 + config_.spatial_dims || x.shape()[1] != config_.in_channels) {
    throw ShapeError("backbone: input " + ad::shape_str(x.shape()) + " does not match " +
                     std::to_string(config_.in_channels) + " input channels");
  }
  require_finite_activations(x.value(), "backbone input");
  Variable h = apply(lift_, x);
  for (std::size_t l = 0; l < config_.levels; ++l) {
    h = ad::gelu(ad::add(spectral_[l].forward(h), apply(bypass_[l], h)));
    require_finite_activations(h.value(), "backbone level " + std::to_string(l));
  }
  Variable out = apply(project_, h);
  require_finite_activations(out.value(), "backbone projection");
  return out;
}

std::vector<NamedParameter> FnoBackbone::parameters() const {
  std::vector<NamedParameter> params{{"lift.weight", lift_.weight}, {"lift.bias", lift_.bias}};
  for (std::size_t l = 0; l < config_.levels; ++l) {
    const std::string prefix = "level" + std::to_string(l) + ".";
    params.push_back({prefix + "spectral", spectral_[l].weights()});
    params.push_back({prefix + "weight", bypass_[l].weight});
    params.push_back({prefix + "bias", bypass_[l].bias});
  }
  params.push_back({"project.weight", project_.weight});
  params.push_back({"project.bias", project_.bias});
  return params;
}

std::vector<Variable*> FnoBackbone::slots() {
  std::vector<Variable*> out{&lift_.weight, &lift_.bias};
  for (std::size_t l = 0; l < spectral_.size(); ++l) {
    out.push_back(&spectral_[l].weights());
    out.push_back(&bypass_[l].weight);
    out.push_back(&bypass_[l].bias);
  }
  out.push_back(&project_.weight);
  out.push_back(&project_.bias);
  return out;
}

FnoBackbone FnoBackbone::rebind(const std::vector<Variable>& params) const {
  FnoBackbone copy = *this;
  auto slots = copy.slots();
  if (params.size() != slots.size()) throw ShapeError("backbone: rebind needs one variable per parameter");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (params[i].shape() != slots[i]->shape()) throw ShapeError("backbone: rebind shape mismatch");
    *slots[i] = params[i];
  }
  return copy;
}

}  // namespace latefuse::op
