#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "latefuse/autodiff/tensor.hpp"
#include "latefuse/pde/equation.hpp"
#include "latefuse/pde/grid.hpp"

namespace latefuse::pde {

using ad::Tensor;

/// Superposition of random sinusoids
///   u0(x) = sum_i A_i sin(k_i x + phi_i),  k_i = 2 pi n_i / L.
struct InitialConditionSpec {
  int num_waves = 2;
  int max_wavenumber = 8;
  double amplitude_lo = 0.0;
  double amplitude_hi = 1.0;
  double phase_lo = 0.0;
  double phase_hi = 2.0 * std::numbers::pi;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SinusoidWave {
  double amplitude = 0.0;
  int wavenumber = 1;  // integer n, k = 2 pi n / L
  double phase = 0.0;
};

/// Initial state handed to the solvers. `waves` is set when the field is an
/// exact sinusoid sum (lets the advection solver evaluate analytically).
struct InitialState {
  Tensor field;  // [V, X] or [V, X, Y]
  std::optional<std::vector<SinusoidWave>> waves;
};

/// Evaluates sum_i A_i sin(2 pi n_i (x - shift) / L + phi_i) at the grid
/// points of a 1D grid. Returns [1, X].
Tensor evaluate_sinusoids(const std::vector<SinusoidWave>& waves, const GridSpec& grid,
                          Boundary boundary, double shift = 0.0);

/// Draws (A_i, n_i, phi_i) and evaluates them. Requires a 1D grid with at
/// least 2 * max_wavenumber points.
InitialState sample_initial_condition(const InitialConditionSpec& spec, const GridSpec& grid,
                                      Boundary boundary = Boundary::kPeriodic);

/// Family-specific initial state:
///  - advection, burgers: the sinusoid sum as is;
///  - rd1d: the sinusoid sum min-max rescaled into [0, 1];
///  - rd2d: i.i.d. standard normal noise per cell and variable.
InitialState sample_family_initial_condition(EquationFamily family, const InitialConditionSpec& spec,
                                             const GridSpec& grid);

}  // namespace latefuse::pde
