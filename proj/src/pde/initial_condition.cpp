#include "latefuse/pde/initial_condition.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "latefuse/common/error.hpp"

namespace latefuse::pde {

void InitialConditionSpec::validate() const {
  if (num_waves < 1) throw ConfigError("initial condition: num_waves must be >= 1");
  if (max_wavenumber < 1) throw ConfigError("initial condition: max_wavenumber must be >= 1");
  if (!(amplitude_hi > amplitude_lo)) throw ConfigError("initial condition: empty amplitude range");
  if (!(phase_hi > phase_lo)) throw ConfigError("initial condition: empty phase range");
}

Tensor evaluate_sinusoids(const std::vector<SinusoidWave>& waves, const GridSpec& grid,
                          Boundary boundary, double shift) {
  if (grid.spatial_dims != 1) throw ConfigError("sinusoidal initial conditions need a 1D grid");
  const auto x = grid.coordinates(0, boundary);
  const double length = grid.length(0);
  Tensor u({1, x.size()});
  for (const auto& w : waves) {
    const double k = 2.0 * std::numbers::pi * static_cast<double>(w.wavenumber) / length;
    for (std::size_t i = 0; i < x.size(); ++i) u[i] += w.amplitude * std::sin(k * (x[i] - shift) + w.phase);
  }
  return u;
}

InitialState sample_initial_condition(const InitialConditionSpec& spec, const GridSpec& grid,
                                      Boundary boundary) {
  spec.validate();
  grid.validate();
  if (grid.spatial_dims != 1) throw ConfigError("sinusoidal initial conditions need a 1D grid");
  if (grid.points[0] < 2 * static_cast<std::size_t>(spec.max_wavenumber)) {
    throw ConfigError("initial condition: grid has fewer than 2*max_wavenumber points (aliasing)");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> amplitude(spec.amplitude_lo, spec.amplitude_hi);
  std::uniform_int_distribution<int> wavenumber(1, spec.max_wavenumber);
  std::uniform_real_distribution<double> phase(spec.phase_lo, spec.phase_hi);
  std::vector<SinusoidWave> waves(static_cast<std::size_t>(spec.num_waves));
  for (auto& w : waves) {
    w.amplitude = amplitude(rng);
    w.wavenumber = wavenumber(rng);
    w.phase = phase(rng);
  }
  InitialState state;
  state.field = evaluate_sinusoids(waves, grid, boundary);
  state.waves = std::move(waves);
  return state;
}

InitialState sample_family_initial_condition(EquationFamily family, const InitialConditionSpec& spec,
                                             const GridSpec& grid) {
  switch (family) {
    case EquationFamily::kAdvection:
    case EquationFamily::kBurgers:
      return sample_initial_condition(spec, grid, default_boundary(family));
    case EquationFamily::kReactionDiffusion1D: {
      InitialState s = sample_initial_condition(spec, grid, default_boundary(family));
      auto data = s.field.data();
      const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
      const double min = *lo, range = *hi - *lo;
      if (range > 0.0) {
        for (auto& v : data) v = (v - min) / range;
      }
      s.waves.reset();
      return s;
    }
    case EquationFamily::kReactionDiffusion2D: {
      grid.validate();
      if (grid.spatial_dims != 2) throw ConfigError("rd2d needs a 2D grid");
      std::mt19937_64 rng(spec.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      InitialState s;
      s.field = Tensor({2, grid.points[0], grid.points[1]});
      for (auto& v : s.field.data()) v = normal(rng);
      return s;
    }
  }
  throw ConfigError("unknown equation family");
}

}  // namespace latefuse::pde
