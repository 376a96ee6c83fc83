#include "latefuse/pde/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "latefuse/autodiff/fft.hpp"
#include "latefuse/common/error.hpp"

namespace latefuse::pde {

namespace {

constexpr double kAdvectiveCfl = 0.4;
constexpr double kDiffusiveCfl = 0.4;
constexpr double kRk4StabilityLimit = 2.5;
// Substep selection aims below the hard limits so a modest growth of
// max|u| during a snapshot interval does not trip the check.
constexpr double kSelectionMargin = 0.75;

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

void require_finite(const Tensor& t, const std::string& what, std::size_t snapshot) {
  if (!t.all_finite()) {
    throw NonFiniteError(what + ": non-finite state at snapshot " + std::to_string(snapshot) +
                         " (trajectory rejected)");
  }
}

void store_snapshot(Tensor& states, std::size_t index, std::span<const double> field) {
  std::copy(field.begin(), field.end(), states.data().begin() + index * field.size());
}

Tensor make_states(const GridSpec& grid, const Tensor& field) {
  ad::Shape shape{grid.num_snapshots()};
  shape.insert(shape.end(), field.shape().begin(), field.shape().end());
  return Tensor(shape);
}

// ---------------------------------------------------------------- advection

Tensor solve_advection(const Advection& eq, const GridSpec& grid, const InitialState& initial) {
  Tensor states = make_states(grid, initial.field);
  const std::size_t n = grid.points[0];
  const double length = grid.length(0);
  const ad::Tensor spectrum = initial.waves ? ad::Tensor() : ad::fft::rfft_last(initial.field);
  for (std::size_t s = 0; s < grid.num_snapshots(); ++s) {
    const double shift = eq.beta * grid.snapshot_dt * static_cast<double>(s);
    if (s == 0) {
      store_snapshot(states, 0, initial.field.data());
    } else if (initial.waves) {
      store_snapshot(states, s, evaluate_sinusoids(*initial.waves, grid, Boundary::kPeriodic, shift).data());
    } else {
      Tensor shifted = spectrum;
      for (std::size_t k = 0; k <= n / 2; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) * shift / length;
        const std::complex<double> z =
            std::complex<double>(shifted[2 * k], shifted[2 * k + 1]) * std::polar(1.0, angle);
        shifted[2 * k] = z.real();
        shifted[2 * k + 1] = z.imag();
      }
      store_snapshot(states, s, ad::fft::irfft_last(shifted, n).data());
    }
  }
  return states;
}

// ------------------------------------------------------------------ burgers

class BurgersRhs {
 public:
  BurgersRhs(double diffusion, double dx, std::size_t n)
      : diffusion_(diffusion), dx_(dx), n_(n), slope_(n), flux_(n) {}

  // out = -d/dx (u^2/2) + diffusion * d2u/dx2, periodic.
  void operator()(const std::vector<double>& u, std::vector<double>& out) {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
      const double left = u[i] - u[(i + n - 1) % n];
      const double right = u[(i + 1) % n] - u[i];
      slope_[i] = minmod(left, right);
    }
    // flux_[i] is the flux through the interface between i and i+1.
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      const double ul = u[i] + 0.5 * slope_[i];
      const double ur = u[j] - 0.5 * slope_[j];
      const double a = std::max(std::abs(ul), std::abs(ur));
      flux_[i] = 0.25 * (ul * ul + ur * ur) - 0.5 * a * (ur - ul);
    }
    const double inv_dx = 1.0 / dx_;
    const double nu_dx2 = diffusion_ / (dx_ * dx_);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
      out[i] = -(flux_[i] - flux_[im]) * inv_dx + nu_dx2 * (u[ip] - 2.0 * u[i] + u[im]);
    }
  }

 private:
  double diffusion_, dx_;
  std::size_t n_;
  std::vector<double> slope_, flux_;
};

void check_burgers_cfl(double max_u, double diffusion, double dt, double dx) {
  if (max_u * dt / dx > kAdvectiveCfl || diffusion * dt / (dx * dx) > kDiffusiveCfl) {
    throw CflViolation("burgers: internal step " + std::to_string(dt) +
                       " violates the CFL bound (max|u|*dt/dx <= 0.4, nu*pi*dt/dx^2 <= 0.4)");
  }
}

Tensor solve_burgers(const Burgers& eq, const GridSpec& grid, const InitialState& initial) {
  Tensor states = make_states(grid, initial.field);
  const std::size_t n = grid.points[0];
  const double dx = grid.spacing(0);
  const double diffusion = eq.nu * std::numbers::pi;
  const double dt = grid.snapshot_dt / static_cast<double>(grid.internal_substeps);
  BurgersRhs rhs(diffusion, dx, n);
  std::vector<double> u(initial.field.data().begin(), initial.field.data().end());
  std::vector<double> k(n), stage(n);
  store_snapshot(states, 0, u);
  for (std::size_t s = 1; s < grid.num_snapshots(); ++s) {
    for (std::size_t sub = 0; sub < grid.internal_substeps; ++sub) {
      check_burgers_cfl(max_abs(u), diffusion, dt, dx);
      rhs(u, k);
      for (std::size_t i = 0; i < n; ++i) stage[i] = u[i] + dt * k[i];
      check_burgers_cfl(max_abs(stage), diffusion, dt, dx);
      rhs(stage, k);
      for (std::size_t i = 0; i < n; ++i) u[i] = 0.5 * u[i] + 0.5 * (stage[i] + dt * k[i]);
    }
    store_snapshot(states, s, u);
    if (!std::all_of(u.begin(), u.end(), [](double v) { return std::isfinite(v); })) {
      throw NonFiniteError("burgers: non-finite state at snapshot " + std::to_string(s) +
                           " (trajectory rejected)");
    }
  }
  return states;
}

// --------------------------------------------------------------------- rd1d

void logistic_step(std::vector<double>& u, double rho, double tau) {
  const double growth = std::exp(rho * tau);
  for (auto& v : u) v = v * growth / (1.0 - v + v * growth);
}

Tensor solve_rd1d(const ReactionDiffusion1D& eq, const GridSpec& grid, const InitialState& initial) {
  Tensor states = make_states(grid, initial.field);
  const std::size_t n = grid.points[0];
  const double length = grid.length(0);
  const double dt = grid.snapshot_dt / static_cast<double>(grid.internal_substeps);
  std::vector<double> decay(n / 2 + 1);
  for (std::size_t k = 0; k < decay.size(); ++k) {
    const double wave = 2.0 * std::numbers::pi * static_cast<double>(k) / length;
    decay[k] = std::exp(-eq.nu * wave * wave * dt);
  }
  Tensor u = initial.field;
  store_snapshot(states, 0, u.data());
  for (std::size_t s = 1; s < grid.num_snapshots(); ++s) {
    for (std::size_t sub = 0; sub < grid.internal_substeps; ++sub) {
      logistic_step(u.storage(), eq.rho, 0.5 * dt);
      if (eq.nu != 0.0) {
        Tensor spectrum = ad::fft::rfft_last(u);
        for (std::size_t k = 0; k < decay.size(); ++k) {
          spectrum[2 * k] *= decay[k];
          spectrum[2 * k + 1] *= decay[k];
        }
        u = ad::fft::irfft_last(spectrum, n);
      }
      logistic_step(u.storage(), eq.rho, 0.5 * dt);
    }
    require_finite(u, "rd1d", s);
    store_snapshot(states, s, u.data());
  }
  return states;
}

// --------------------------------------------------------------------- rd2d

class FitzHughNagumoRhs {
 public:
  FitzHughNagumoRhs(const ReactionDiffusion2D& eq, const GridSpec& grid)
      : eq_(eq), nx_(grid.points[0]), ny_(grid.points[1]),
        inv_dx2_(1.0 / (grid.spacing(0) * grid.spacing(0))),
        inv_dy2_(1.0 / (grid.spacing(1) * grid.spacing(1))) {}

  // Cell-centred 5-point Laplacian; mirrored ghost cells give zero flux.
  double laplacian(const double* f, std::size_t i, std::size_t j) const {
    const double c = f[i * ny_ + j];
    const double xm = f[(i == 0 ? i : i - 1) * ny_ + j];
    const double xp = f[(i + 1 == nx_ ? i : i + 1) * ny_ + j];
    const double ym = f[i * ny_ + (j == 0 ? j : j - 1)];
    const double yp = f[i * ny_ + (j + 1 == ny_ ? j : j + 1)];
    return (xm - 2.0 * c + xp) * inv_dx2_ + (ym - 2.0 * c + yp) * inv_dy2_;
  }

  void operator()(const std::vector<double>& state, std::vector<double>& out) const {
    const std::size_t cells = nx_ * ny_;
    const double* u = state.data();
    const double* v = state.data() + cells;
    for (std::size_t i = 0; i < nx_; ++i)
      for (std::size_t j = 0; j < ny_; ++j) {
        const std::size_t c = i * ny_ + j;
        out[c] = eq_.du * laplacian(u, i, j) + u[c] - u[c] * u[c] * u[c] - eq_.k - v[c];
        out[cells + c] = eq_.dv * laplacian(v, i, j) + u[c] - v[c];
      }
  }

  // Spectral-radius bound used for the explicit stability check.
  double stiffness(double max_abs_state) const {
    const double diff = 4.0 * std::max(eq_.du, eq_.dv) * (inv_dx2_ + inv_dy2_);
    return diff + 3.0 * max_abs_state * max_abs_state + 2.0;
  }

 private:
  ReactionDiffusion2D eq_;
  std::size_t nx_, ny_;
  double inv_dx2_, inv_dy2_;
};

Tensor solve_rd2d(const ReactionDiffusion2D& eq, const GridSpec& grid, const InitialState& initial) {
  Tensor states = make_states(grid, initial.field);
  const FitzHughNagumoRhs rhs(eq, grid);
  const double dt = grid.snapshot_dt / static_cast<double>(grid.internal_substeps);
  std::vector<double> y(initial.field.data().begin(), initial.field.data().end());
  const std::size_t m = y.size();
  std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m);
  store_snapshot(states, 0, y);
  for (std::size_t s = 1; s < grid.num_snapshots(); ++s) {
    for (std::size_t sub = 0; sub < grid.internal_substeps; ++sub) {
      if (dt * rhs.stiffness(max_abs(y)) > kRk4StabilityLimit) {
        throw CflViolation("rd2d: internal step " + std::to_string(dt) + " exceeds the RK4 stability bound");
      }
      rhs(y, k1);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
      rhs(tmp, k2);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
      rhs(tmp, k3);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + dt * k3[i];
      rhs(tmp, k4);
      for (std::size_t i = 0; i < m; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    store_snapshot(states, s, y);
    if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
      throw NonFiniteError("rd2d: non-finite state at snapshot " + std::to_string(s) +
                           " (trajectory rejected)");
    }
  }
  return states;
}

}  // namespace

Trajectory solve_trajectory(const EquationSpec& eq, const GridSpec& grid, const InitialState& initial) {
  eq.validate();
  grid.validate();
  const auto family = eq.family();
  if (grid.spatial_dims != spatial_dims(family)) {
    throw ConfigError("solve: grid dimensionality does not match " + to_string(family));
  }
  ad::Shape expected{state_variables(family)};
  expected.insert(expected.end(), grid.points.begin(), grid.points.end());
  if (initial.field.shape() != expected) {
    throw ShapeError("solve: initial field " + ad::shape_str(initial.field.shape()) + " != grid shape " +
                     ad::shape_str(expected));
  }
  require_finite(initial.field, "solve", 0);

  Trajectory traj;
  traj.params = parameter_vector(eq);
  traj.equation = eq;
  traj.grid = grid;
  traj.states = std::visit(
      [&](const auto& terms) -> Tensor {
        using T = std::decay_t<decltype(terms)>;
        if constexpr (std::is_same_v<T, Advection>) return solve_advection(terms, grid, initial);
        if constexpr (std::is_same_v<T, Burgers>) return solve_burgers(terms, grid, initial);
        if constexpr (std::is_same_v<T, ReactionDiffusion1D>) return solve_rd1d(terms, grid, initial);
        if constexpr (std::is_same_v<T, ReactionDiffusion2D>) return solve_rd2d(terms, grid, initial);
      },
      eq.terms);
  return traj;
}

std::size_t stable_substeps(const EquationSpec& eq, const GridSpec& grid, const Tensor& initial_field) {
  const double max_u = max_abs(initial_field.data());
  double max_dt = grid.snapshot_dt;
  if (const auto* b = std::get_if<Burgers>(&eq.terms)) {
    const double dx = grid.spacing(0);
    const double diffusion = b->nu * std::numbers::pi;
    if (max_u > 0.0) max_dt = std::min(max_dt, kSelectionMargin * kAdvectiveCfl * dx / max_u);
    if (diffusion > 0.0) max_dt = std::min(max_dt, kSelectionMargin * kDiffusiveCfl * dx * dx / diffusion);
  } else if (const auto* r = std::get_if<ReactionDiffusion2D>(&eq.terms)) {
    const FitzHughNagumoRhs rhs(*r, grid);
    // Target a step well inside the stability region for accuracy as well.
    max_dt = std::min(max_dt, 1.0 / rhs.stiffness(max_u));
  }
  const auto steps = static_cast<std::size_t>(std::ceil(grid.snapshot_dt / max_dt - 1e-12));
  return std::max<std::size_t>(1, steps);
}

}  // namespace latefuse::pde
