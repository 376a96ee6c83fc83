#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "latefuse/common/error.hpp"
#include "latefuse/pde/solvers.hpp"
#include "support/dft_oracle.hpp"
#include "support/pde_oracles.hpp"

using namespace latefuse;
using namespace latefuse::pde;
using latefuse::testing::periodic_grid;

TEST_CASE("grid coordinates and validation") {
  const auto g = periodic_grid(8, 0.05, 0.5);
  CHECK(g.num_steps() == 10);
  CHECK(g.num_snapshots() == 11);
  const auto x = g.coordinates(0, Boundary::kPeriodic);
  CHECK(x[1] == doctest::Approx(0.125));
  const auto xc = g.coordinates(0, Boundary::kNeumannNoFlow);
  CHECK(xc[0] == doctest::Approx(0.0625));

  auto bad = g;
  bad.points = {3};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = g;
  bad.horizon = 0.51;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = g;
  bad.internal_substeps = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = g;
  bad.snapshot_dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("equation specs") {
  CHECK(parse_family("advection") == EquationFamily::kAdvection);
  CHECK_THROWS_AS(parse_family("heat"), ConfigError);
  const auto eq = make_equation(EquationFamily::kReactionDiffusion1D, std::array{0.05, 0.5});
  CHECK(parameter_vector(eq) == std::vector<double>{0.05, 0.5});
  CHECK(eq.boundary == Boundary::kPeriodic);
  CHECK(make_equation(EquationFamily::kReactionDiffusion2D, std::array{0.01}).boundary == Boundary::kNeumannNoFlow);
  CHECK_THROWS_AS(make_equation(EquationFamily::kBurgers, std::array{-0.1}), ConfigError);
  CHECK_THROWS_AS(make_equation(EquationFamily::kBurgers, std::array{0.1, 0.2}), ConfigError);
  EquationSpec wrong{Advection{0.2}, Boundary::kNeumannNoFlow};
  CHECK_THROWS_AS(wrong.validate(), ConfigError);
}

TEST_CASE("parameter ranges") {
  const auto adv_in = default_ranges(EquationFamily::kAdvection, Split::kInDomainTest);
  CHECK(adv_in.size() == 1);
  CHECK(adv_in[0].lo == 0.0);
  CHECK(adv_in[0].hi == 0.5);
  const auto adv_out = default_ranges(EquationFamily::kAdvection, Split::kOutDomainTest);
  CHECK(adv_out[0].lo == 0.5);
  CHECK(adv_out[0].hi == 1.0);
  const auto bur_out = default_ranges(EquationFamily::kBurgers, Split::kOutDomainTest);
  CHECK(bur_out[0].lo == 0.0);
  CHECK(bur_out[0].hi == 0.01);
  const auto rd_out = default_ranges(EquationFamily::kReactionDiffusion1D, Split::kOutDomainTest);
  CHECK(rd_out[0].name == "nu");
  CHECK(rd_out[0].lo == 0.1);
  CHECK(rd_out[1].name == "rho");
  CHECK(rd_out[1].hi == 1.0);
  const auto k_out = default_ranges(EquationFamily::kReactionDiffusion2D, Split::kOutDomainTest);
  CHECK(k_out[0].lo == 0.05);
  CHECK(k_out[0].hi == 0.075);
  CHECK(default_ranges(EquationFamily::kReactionDiffusion2D, Split::kTrain)[0].hi == 0.05);
}

TEST_CASE("single forced wave is sin(2 pi x) on 8 points") {
  const auto g = periodic_grid(8, 0.05, 0.5);
  const auto u = evaluate_sinusoids({{1.0, 1, 0.0}}, g, Boundary::kPeriodic);
  REQUIRE(u.shape() == ad::Shape{1, 8});
  for (std::size_t i = 0; i < 8; ++i) CHECK(u[i] == doctest::Approx(std::sin(2.0 * std::numbers::pi * i / 8.0)));
}

TEST_CASE("sampled initial condition has spectral support at the drawn wavenumbers only") {
  const auto g = periodic_grid(64, 0.05, 0.5);
  InitialConditionSpec spec;
  spec.seed = 7;
  const auto init = sample_initial_condition(spec, g);
  REQUIRE(init.waves);
  REQUIRE(init.waves->size() == 2);
  std::vector<double> x(init.field.data().begin(), init.field.data().end());
  const auto spectrum = latefuse::testing::dense_dft(x);
  double total = 0.0, support = 0.0;
  for (std::size_t k = 1; k <= 32; ++k) {
    const double e = std::norm(spectrum[k]);
    total += e;
    bool drawn = false;
    for (const auto& w : *init.waves) drawn = drawn || static_cast<std::size_t>(w.wavenumber) == k;
    if (drawn) {
      support += e;
    } else {
      CHECK(e < 1e-20);
    }
  }
  CHECK(support > 0.0);
  CHECK(support == doctest::Approx(total).epsilon(1e-12));
  for (const auto& w : *init.waves) {
    CHECK(w.wavenumber >= 1);
    CHECK(w.wavenumber <= 8);
    CHECK(w.amplitude > 0.0);
    CHECK(w.amplitude < 1.0);
  }
}

TEST_CASE("initial condition sampling is deterministic and rejects aliasing grids") {
  InitialConditionSpec spec;
  spec.seed = 123;
  const auto g = periodic_grid(64, 0.05, 0.5);
  CHECK(sample_initial_condition(spec, g).field == sample_initial_condition(spec, g).field);
  spec.seed = 124;
  CHECK_FALSE(sample_initial_condition(spec, g).field == sample_initial_condition(InitialConditionSpec{}, g).field);
  CHECK_THROWS_AS(sample_initial_condition(spec, periodic_grid(15, 0.05, 0.5)), ConfigError);
  CHECK_NOTHROW(sample_initial_condition(spec, periodic_grid(16, 0.05, 0.5)));
  spec.num_waves = 0;
  CHECK_THROWS_AS(sample_initial_condition(spec, g), ConfigError);
}

TEST_CASE("family initial conditions") {
  InitialConditionSpec spec;
  spec.seed = 9;
  const auto rd = sample_family_initial_condition(EquationFamily::kReactionDiffusion1D, spec, periodic_grid(64, 0.005, 0.5));
  const auto [lo, hi] = std::minmax_element(rd.field.data().begin(), rd.field.data().end());
  CHECK(*lo == doctest::Approx(0.0));
  CHECK(*hi == doctest::Approx(1.0));
  const auto g2 = default_grid(EquationFamily::kReactionDiffusion2D, Preset::kDesk);
  const auto noise = sample_family_initial_condition(EquationFamily::kReactionDiffusion2D, spec, g2);
  CHECK(noise.field.shape() == ad::Shape{2, 32, 32});
  const double mean = std::accumulate(noise.field.data().begin(), noise.field.data().end(), 0.0) /
                      static_cast<double>(noise.field.numel());
  CHECK(std::abs(mean) < 0.1);
}

TEST_CASE("advection: sin(2 pi x) with beta 0.5 shifts by a quarter at t = 0.5") {
  const auto g = periodic_grid(64, 0.05, 0.5);
  InitialState init{evaluate_sinusoids({{1.0, 1, 0.0}}, g, Boundary::kPeriodic), std::vector<SinusoidWave>{{1.0, 1, 0.0}}};
  const auto traj = solve_trajectory(make_equation(EquationFamily::kAdvection, std::array{0.5}), g, init);
  REQUIRE(traj.states.shape() == ad::Shape{11, 1, 64});
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(std::abs(traj.states[10 * 64 + i] - std::sin(2.0 * std::numbers::pi * (i / 64.0 - 0.25))) < 1e-12);
  }
}

TEST_CASE("advection matches the characteristic solution at every snapshot") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    CHECK(latefuse::testing::advection_closed_form_error(seed, 0.37) < 1e-12);
    CHECK(latefuse::testing::advection_closed_form_error(seed, 0.83, false) < 1e-12);
  }
}

TEST_CASE("advection conserves the spatial sum") {
  const auto g = periodic_grid(64, 0.05, 0.5);
  InitialConditionSpec spec;
  spec.seed = 4;
  auto init = sample_initial_condition(spec, g);
  init.waves.reset();
  const auto traj = solve_trajectory(make_equation(EquationFamily::kAdvection, std::array{0.3}), g, init);
  const double s0 = std::accumulate(init.field.data().begin(), init.field.data().end(), 0.0);
  for (std::size_t s = 1; s < g.num_snapshots(); ++s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 64; ++i) sum += traj.states[s * 64 + i];
    CHECK(std::abs(sum - s0) < 1e-12);
  }
}

TEST_CASE("rd1d logistic and heat-decay oracles") {
  CHECK(latefuse::testing::logistic_error() < 1e-4);
  CHECK(latefuse::testing::heat_decay_relative_error() < 1e-3);
}

TEST_CASE("rd2d uniform state follows the ODE reduction") {
  CHECK(latefuse::testing::rd2d_uniform_error() < 1e-4);
  CHECK(latefuse::testing::rd2d_uniform_error(-0.4) < 1e-4);
}

TEST_CASE("rd2d keeps a uniform field exactly uniform") {
  auto g = default_grid(EquationFamily::kReactionDiffusion2D, Preset::kDesk);
  g.horizon = 0.5;
  const auto eq = make_equation(EquationFamily::kReactionDiffusion2D, std::array{0.03});
  InitialState init{Tensor({2, 32, 32}, 0.2), std::nullopt};
  g.internal_substeps = stable_substeps(eq, g, init.field);
  const auto traj = solve_trajectory(eq, g, init);
  const std::size_t cells = 32 * 32;
  for (std::size_t s = 0; s < g.num_snapshots(); ++s)
    for (std::size_t v = 0; v < 2; ++v) {
      const double first = traj.states[(s * 2 + v) * cells];
      for (std::size_t i = 1; i < cells; ++i) CHECK(traj.states[(s * 2 + v) * cells + i] == first);
    }
}

namespace {

Trajectory burgers_run(std::size_t substeps, double horizon = 0.1) {
  auto g = default_grid(EquationFamily::kBurgers, Preset::kDesk);
  g.horizon = horizon;
  g.internal_substeps = substeps;
  InitialConditionSpec spec;
  spec.seed = 11;
  const auto init = sample_initial_condition(spec, g);
  return solve_trajectory(make_equation(EquationFamily::kBurgers, std::array{0.02}), g, init);
}

double max_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("burgers self-convergence under substep refinement") {
  auto g = default_grid(EquationFamily::kBurgers, Preset::kDesk);
  InitialConditionSpec spec;
  spec.seed = 11;
  const auto base = stable_substeps(make_equation(EquationFamily::kBurgers, std::array{0.02}), g,
                                    sample_initial_condition(spec, g).field);
  const auto reference = burgers_run(base * 32);
  const double coarse = max_diff(burgers_run(base).states, reference.states);
  const double fine = max_diff(burgers_run(base * 2).states, reference.states);
  CHECK(coarse > 0.0);
  CHECK(fine <= 0.5 * coarse);
}

TEST_CASE("burgers conserves the spatial sum") {
  auto g = default_grid(EquationFamily::kBurgers, Preset::kDesk);
  InitialConditionSpec spec;
  spec.seed = 5;
  const auto init = sample_initial_condition(spec, g);
  for (double nu : {0.0005, 0.015}) {
    const auto eq = make_equation(EquationFamily::kBurgers, std::array{nu});
    g.internal_substeps = stable_substeps(eq, g, init.field);
    const auto traj = solve_trajectory(eq, g, init);
    double s0 = 0.0, scale = 0.0;
    for (double v : init.field.data()) {
      s0 += v;
      scale += std::abs(v);
    }
    for (std::size_t s = 1; s < g.num_snapshots(); ++s) {
      double sum = 0.0;
      for (std::size_t i = 0; i < 64; ++i) sum += traj.states[s * 64 + i];
      CHECK(std::abs(sum - s0) <= 1e-8 * std::max(1.0, scale));
    }
    CHECK(traj.states.all_finite());
  }
}

TEST_CASE("solver errors") {
  const auto g = periodic_grid(64, 0.05, 0.5);
  InitialState big{Tensor({1, 64}, 0.0), std::nullopt};
  for (std::size_t i = 0; i < 64; ++i) big.field[i] = 3.0 * std::sin(2.0 * std::numbers::pi * i / 64.0);
  CHECK_THROWS_AS(solve_trajectory(make_equation(EquationFamily::kBurgers, std::array{0.01}), g, big), CflViolation);

  InitialState nan{Tensor({1, 64}, 0.0), std::nullopt};
  nan.field[3] = std::nan("");
  CHECK_THROWS_AS(solve_trajectory(make_equation(EquationFamily::kReactionDiffusion1D, std::array{0.01, 0.5}), g, nan),
                  NonFiniteError);

  InitialState wrong{Tensor({1, 32}, 0.0), std::nullopt};
  CHECK_THROWS_AS(solve_trajectory(make_equation(EquationFamily::kAdvection, std::array{0.1}), g, wrong), ShapeError);

  auto g2 = default_grid(EquationFamily::kReactionDiffusion2D, Preset::kDesk);
  InitialState noisy{Tensor({2, 32, 32}, 3.0), std::nullopt};
  CHECK_THROWS_AS(solve_trajectory(make_equation(EquationFamily::kReactionDiffusion2D, std::array{0.01}), g2, noisy),
                  CflViolation);
}
