#pragma once

#include <cstddef>
#include <vector>

#include "latefuse/pde/equation.hpp"
#include "latefuse/pde/initial_condition.hpp"

namespace latefuse::pde {

struct Trajectory {
  std::vector<double> params;  // beta vector, order = parameter_names(family)
  Tensor states;               // [T+1, V, X] or [T+1, V, X, Y]
  EquationSpec equation;
  GridSpec grid;
};

/// Integrates the equation from `initial` and returns every snapshot
/// t = 0, dt, ..., T.
///
///  - advection: exact characteristic shift (analytic when the initial
///    waves are known, otherwise an exact Fourier shift);
///  - burgers: MUSCL/minmod reconstruction with a local Lax-Friedrichs flux,
///    central diffusion, SSP-RK2 in time;
///  - rd1d: Strang splitting of exact spectral diffusion and the exact
///    logistic reaction;
///  - rd2d: 5-point no-flow Laplacian, classical RK4.
///
/// Uses grid.internal_substeps steps per snapshot. Throws CflViolation if
/// that is too few for the explicit schemes, NonFiniteError on blow-up.
Trajectory solve_trajectory(const EquationSpec& eq, const GridSpec& grid, const InitialState& initial);

/// Smallest substep count keeping the explicit schemes inside their
/// stability bounds (with margin) for this initial field.
std::size_t stable_substeps(const EquationSpec& eq, const GridSpec& grid, const Tensor& initial_field);

}  // namespace latefuse::pde
