#pragma once

// Closed-form and fine-step references for the trajectory generators. Each
// function runs the production solver on one configuration and returns the
// error against an independent evaluation.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "latefuse/pde/solvers.hpp"

namespace latefuse::testing {

inline pde::GridSpec periodic_grid(std::size_t n, double dt, double horizon, std::size_t substeps = 1) {
  pde::GridSpec g;
  g.points = {n};
  g.bounds = {{0.0, 1.0}};
  g.snapshot_dt = dt;
  g.horizon = horizon;
  g.internal_substeps = substeps;
  return g;
}

// Max-abs error of the advection generator against u0((x - beta t) mod L),
// evaluated term by term from the drawn waves, over every snapshot.
inline double advection_closed_form_error(std::uint64_t seed, double beta, bool exact_path = true) {
  const auto grid = periodic_grid(128, 0.05, 0.5);
  pde::InitialConditionSpec spec;
  spec.seed = seed;
  pde::InitialState init = pde::sample_initial_condition(spec, grid);
  const auto waves = *init.waves;
  if (!exact_path) init.waves.reset();
  const auto traj = pde::solve_trajectory(pde::make_equation(pde::EquationFamily::kAdvection, std::array{beta}),
                                          grid, init);
  double err = 0.0;
  const std::size_t n = grid.points[0];
  for (std::size_t s = 0; s < grid.num_snapshots(); ++s) {
    const double t = grid.snapshot_dt * static_cast<double>(s);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(n);
      const double xi = std::fmod(std::fmod(x - beta * t, 1.0) + 1.0, 1.0);
      double expect = 0.0;
      for (const auto& w : waves) expect += w.amplitude * std::sin(2.0 * std::numbers::pi * w.wavenumber * xi + w.phase);
      err = std::max(err, std::abs(traj.states[s * n + i] - expect));
    }
  }
  return err;
}

// nu = 0, rho = 1, u0 = 0.5: u(T) = u0 e^{rho T} / (1 - u0 + u0 e^{rho T}).
inline double logistic_error() {
  const auto grid = periodic_grid(64, 0.005, 0.5, 50);
  pde::InitialState init{pde::Tensor({1, 64}, 0.5), std::nullopt};
  const auto traj = pde::solve_trajectory(
      pde::make_equation(pde::EquationFamily::kReactionDiffusion1D, std::array{0.0, 1.0}), grid, init);
  const double g = std::exp(0.5);
  const double expect = 0.5 * g / (1.0 - 0.5 + 0.5 * g);
  double err = 0.0;
  const std::size_t last = grid.num_steps();
  for (std::size_t i = 0; i < 64; ++i) err = std::max(err, std::abs(traj.states[last * 64 + i] - expect));
  return err;
}

// rho = 0, nu = 0.1, u0 = sin(2 pi x): u(T) = sin(2 pi x) exp(-nu (2 pi)^2 T).
// Returns max-abs error relative to the decayed amplitude.
inline double heat_decay_relative_error() {
  const std::size_t n = 128;
  const auto grid = periodic_grid(n, 0.005, 0.5, 50);
  pde::InitialState init{pde::Tensor({1, n}), std::nullopt};
  for (std::size_t i = 0; i < n; ++i) init.field[i] = std::sin(2.0 * std::numbers::pi * i / n);
  const auto traj = pde::solve_trajectory(
      pde::make_equation(pde::EquationFamily::kReactionDiffusion1D, std::array{0.1, 0.0}), grid, init);
  const double amp = std::exp(-0.1 * 4.0 * std::numbers::pi * std::numbers::pi * 0.5);
  const std::size_t last = grid.num_steps();
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    err = std::max(err, std::abs(traj.states[last * n + i] - amp * std::sin(2.0 * std::numbers::pi * i / n)));
  }
  return err / amp;
}

// RD2D with k = 0 and uniform u0 = v0 = c stays uniform; compares every
// snapshot with the ODE u' = u - u^3 - v, v' = u - v integrated by RK4 at
// dt = 1e-4. Returns the max-abs error over cells, variables and snapshots.
inline double rd2d_uniform_error(double c = 0.7) {
  auto grid = pde::default_grid(pde::EquationFamily::kReactionDiffusion2D, pde::Preset::kDesk);
  const auto eq = pde::make_equation(pde::EquationFamily::kReactionDiffusion2D, std::array{0.0});
  pde::InitialState init{pde::Tensor({2, grid.points[0], grid.points[1]}, c), std::nullopt};
  grid.internal_substeps = pde::stable_substeps(eq, grid, init.field);
  const auto traj = pde::solve_trajectory(eq, grid, init);

  auto f = [](std::array<double, 2> y) {
    return std::array<double, 2>{y[0] - y[0] * y[0] * y[0] - y[1], y[0] - y[1]};
  };
  std::array<double, 2> y{c, c};
  const std::size_t fine = 1000;
  const double h = grid.snapshot_dt / fine;
  const std::size_t cells = grid.points[0] * grid.points[1];
  double err = 0.0;
  for (std::size_t s = 0; s < grid.num_snapshots(); ++s) {
    if (s > 0) {
      for (std::size_t k = 0; k < fine; ++k) {
        const auto k1 = f(y);
        const auto k2 = f({y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
        const auto k3 = f({y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
        const auto k4 = f({y[0] + h * k3[0], y[1] + h * k3[1]});
        for (int v = 0; v < 2; ++v) y[v] += h / 6.0 * (k1[v] + 2 * k2[v] + 2 * k3[v] + k4[v]);
      }
    }
    for (std::size_t v = 0; v < 2; ++v)
      for (std::size_t i = 0; i < cells; ++i) {
        err = std::max(err, std::abs(traj.states[(s * 2 + v) * cells + i] - y[v]));
      }
  }
  return err;
}

}  // namespace latefuse::testing
