#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "latefuse/common/binary_io.hpp"
#include "latefuse/common/error.hpp"
#include "latefuse/evaluation/interpret.hpp"
#include "latefuse/evaluation/report.hpp"
#include "support/dft_oracle.hpp"
#include "support/operator_oracles.hpp"
#include "support/temp_dir.hpp"

using namespace latefuse;
using namespace latefuse::eval;
using latefuse::testing::random_field;
using latefuse::testing::TempDir;

namespace {

pde::Dataset advection(pde::Split split, std::size_t count, std::uint64_t seed = 5) {
  pde::GenerateOptions o;
  o.family = pde::EquationFamily::kAdvection;
  o.split = split;
  o.count = count;
  o.seed = seed;
  o.grid = pde::default_grid(o.family, pde::Preset::kDesk);
  return pde::generate_dataset(o);
}

train::Surrogate surrogate(train::ModelKind kind, double xi_fill = 0.0) {
  train::ModelSpec s;
  s.kind = kind;
  s.width = 6;
  s.modes = 4;
  s.seed = 21;
  train::Surrogate m(s);
  if (kind == train::ModelKind::kLateFusion && xi_fill != 0.0) {
    ad::Variable xi = m.xi();
    xi.set_value(Tensor(xi.shape(), xi_fill));
  }
  return m;
}

// Straightforward restatement of the metric conventions for one sample:
// every entry after t = 0 counts once.
double oracle_rmse(const Tensor& p, const Tensor& t, std::size_t skip) {
  double s = 0.0;
  for (std::size_t i = skip; i < p.numel(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
  return std::sqrt(s / static_cast<double>(p.numel() - skip));
}

}  // namespace

TEST_CASE("all six metrics vanish on a perfect prediction") {
  for (const ad::Shape& shape : {ad::Shape{3, 5, 1, 16}, ad::Shape{2, 4, 2, 6, 5}}) {
    const Tensor truth = random_field(shape, 1);
    const auto m = compute_metrics(truth, truth);
    CHECK(m.rmse == 0.0);
    CHECK(m.boundary_rmse == 0.0);
    CHECK(m.nrmse == 0.0);
    CHECK(m.max_error == 0.0);
    CHECK(m.conserved_error == 0.0);
    CHECK(m.fourier_rmse == 0.0);
    CHECK(m.samples == shape[0]);
  }
}

TEST_CASE("constant offset closed forms") {
  const double c = -0.37;
  const std::size_t n = 3, snaps = 6, x = 32;
  const Tensor truth = random_field({n, snaps, 1, x}, 2);
  Tensor pred = truth;
  for (auto& v : pred.data()) v += c;
  const auto m = compute_metrics(pred, truth);
  CHECK(m.rmse == doctest::Approx(std::abs(c)).epsilon(1e-12));
  CHECK(m.max_error == doctest::Approx(std::abs(c)).epsilon(1e-12));
  CHECK(m.boundary_rmse == doctest::Approx(std::abs(c)).epsilon(1e-12));
  const double compared = static_cast<double>(snaps - 1);
  CHECK(m.conserved_error == doctest::Approx(std::abs(c) * static_cast<double>(x) * std::sqrt(compared)).epsilon(1e-12));
  // Only the zero bin carries energy: |c * x|^2 over x bins.
  CHECK(m.fourier_rmse == doctest::Approx(std::abs(c) * std::sqrt(static_cast<double>(x))).epsilon(1e-12));
}

TEST_CASE("t = 0 is excluded") {
  const Tensor truth = random_field({1, 3, 1, 8}, 3);
  Tensor pred = truth;
  for (std::size_t i = 0; i < 8; ++i) pred[i] += 10.0;
  CHECK(compute_metrics(pred, truth).rmse == 0.0);
}

TEST_CASE("rmse matches the per-entry definition") {
  const Tensor truth = random_field({4, 5, 2, 12}, 4);
  const Tensor pred = random_field({4, 5, 2, 12}, 5);
  double acc = 0.0;
  const std::size_t per = 5 * 2 * 12;
  for (std::size_t s = 0; s < 4; ++s) {
    const Tensor p({5, 2, 12}, std::vector<double>(pred.data().begin() + s * per, pred.data().begin() + (s + 1) * per));
    const Tensor t({5, 2, 12}, std::vector<double>(truth.data().begin() + s * per, truth.data().begin() + (s + 1) * per));
    acc += std::pow(oracle_rmse(p, t, 2 * 12), 2);
  }
  CHECK(compute_metrics(pred, truth).rmse == doctest::Approx(std::sqrt(acc / 4.0)).epsilon(1e-13));
}

TEST_CASE("Fourier RMSE against a dense DFT and Parseval") {
  for (std::size_t n : {16u, 64u, 128u}) {
    const Tensor truth = random_field({1, 2, 1, n}, 10 + n);
    const Tensor pred = random_field({1, 2, 1, n}, 20 + n);
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = pred[n + i] - truth[n + i];
    double energy = 0.0;
    for (const auto& z : latefuse::testing::dense_dft(diff)) energy += std::norm(z);
    const auto m = compute_metrics(pred, truth);
    CHECK(m.fourier_rmse == doctest::Approx(std::sqrt(energy / static_cast<double>(n))).epsilon(1e-12));
    const double lhs = m.fourier_rmse * m.fourier_rmse;
    const double rhs = static_cast<double>(n) * m.rmse * m.rmse;
    CHECK(std::abs(lhs - rhs) / rhs < 1e-10);
  }
}

TEST_CASE("layout-free metrics are invariant under a shared spatial permutation") {
  const std::size_t n = 2, snaps = 4, x = 20;
  const Tensor truth = random_field({n, snaps, 1, x}, 6);
  const Tensor pred = random_field({n, snaps, 1, x}, 7);
  std::vector<std::size_t> perm(x);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(8));
  Tensor tp(truth.shape()), pp(pred.shape());
  for (std::size_t b = 0; b < n * snaps; ++b) {
    for (std::size_t i = 0; i < x; ++i) {
      tp[b * x + perm[i]] = truth[b * x + i];
      pp[b * x + perm[i]] = pred[b * x + i];
    }
  }
  const auto a = compute_metrics(pred, truth), b = compute_metrics(pp, tp);
  CHECK(a.rmse == doctest::Approx(b.rmse).epsilon(1e-13));
  CHECK(a.nrmse == doctest::Approx(b.nrmse).epsilon(1e-13));
  CHECK(a.max_error == b.max_error);
  CHECK(a.conserved_error == doctest::Approx(b.conserved_error).epsilon(1e-13));
}

TEST_CASE("nRMSE is scale free") {
  const Tensor truth = random_field({3, 4, 1, 32}, 9, 2.0);
  const Tensor pred = random_field({3, 4, 1, 32}, 10, 2.0);
  const double base = compute_metrics(pred, truth).nrmse;
  for (double c : {-3.0, 0.5, 7.0}) {
    Tensor ts = truth, ps = pred;
    for (auto& v : ts.data()) v *= c;
    for (auto& v : ps.data()) v *= c;
    CHECK(std::abs(compute_metrics(ps, ts).nrmse - base) / base < 1e-6);
  }
}

TEST_CASE("metrics reject mismatched shapes") {
  CHECK_THROWS_AS(compute_metrics(Tensor({1, 3, 1, 8}), Tensor({1, 3, 1, 9})), latefuse::ShapeError);
}

TEST_CASE("zero xi rolls out a constant trajectory") {
  const auto model = surrogate(train::ModelKind::kLateFusion);
  const Tensor u0 = random_field({1, 64}, 11);
  const std::vector<double> beta{0.3};
  const auto r = rollout(model, u0, beta, 10);
  REQUIRE(r.predicted.shape() == ad::Shape{11, 1, 64});
  CHECK_FALSE(r.blowup_step.has_value());
  for (std::size_t t = 0; t <= 10; ++t) {
    for (std::size_t i = 0; i < 64; ++i) CHECK(r.predicted[t * 64 + i] == u0[i]);
  }
}

TEST_CASE("zero steps returns only the initial state") {
  const auto model = surrogate(train::ModelKind::kBaseline);
  const Tensor u0 = random_field({1, 64}, 12);
  const std::vector<double> beta{0.3};
  const auto r = rollout(model, u0, beta, 0);
  CHECK(r.predicted.shape() == ad::Shape{1, 1, 64});
  CHECK(r.predicted.reshaped({1, 64}) == u0);
}

TEST_CASE("rollouts never read ground truth after the initial state") {
  const auto ds = advection(pde::Split::kInDomainTest, 6);
  auto blind = ds;
  for (auto& traj : blind.trajectories) {
    auto d = traj.states.data();
    std::fill(d.begin() + 64, d.end(), std::nan(""));
  }
  for (auto kind : {train::ModelKind::kLateFusion, train::ModelKind::kBaseline}) {
    const auto model = surrogate(kind, 0.1);
    const auto a = rollout_dataset(model, ds), b = rollout_dataset(model, blind);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].predicted == b[i].predicted);
  }
}

TEST_CASE("batched dataset rollout equals single rollouts") {
  const auto ds = advection(pde::Split::kOutDomainTest, 5);
  const auto model = surrogate(train::ModelKind::kLateFusion, 0.05);
  const auto batched = rollout_dataset(model, ds);
  for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
    const auto& traj = ds.trajectories[i];
    const Tensor u0({1, 64}, std::vector<double>(traj.states.data().begin(), traj.states.data().begin() + 64));
    const auto single = rollout(model, u0, traj.params, 10);
    const double scale = std::max(1.0, single.predicted.max_abs());
    for (std::size_t k = 0; k < single.predicted.numel(); ++k) {
      CHECK(std::abs(batched[i].predicted[k] - single.predicted[k]) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("blow-up is recorded and scored on the finite prefix") {
  const auto ds = advection(pde::Split::kInDomainTest, 2);
  const auto model = surrogate(train::ModelKind::kLateFusion, 1e150);
  const auto r = rollout_dataset(model, ds);
  REQUIRE(r[0].blowup_step.has_value());
  const std::size_t b = *r[0].blowup_step;
  CHECK(b >= 1);
  for (std::size_t k = b * 64; k < r[0].predicted.numel(); ++k) CHECK(std::isnan(r[0].predicted[k]));
  const auto ev = evaluate_rollouts(r, ds);
  CHECK(ev.blowups.size() == 2);
  const auto& truth = ds.trajectories[0].states;
  const std::vector<SampleStats> prefix{sample_stats(r[0].predicted, truth, b)};
  const auto expected = aggregate(prefix);
  CHECK(ev.per_trajectory[0].max_error == expected.max_error);
  CHECK_FALSE(std::isnan(ev.per_trajectory[0].rmse));
}

TEST_CASE("evaluate_split agrees with compute_metrics on the same rollouts") {
  const auto ds = advection(pde::Split::kInDomainTest, 4);
  const auto model = surrogate(train::ModelKind::kBaseline);
  const auto ev = evaluate_split(model, ds);
  const auto r = rollout_dataset(model, ds);
  Tensor pred({4, 11, 1, 64}), truth({4, 11, 1, 64});
  for (std::size_t i = 0; i < 4; ++i) {
    std::copy(r[i].predicted.data().begin(), r[i].predicted.data().end(), pred.data().begin() + i * 704);
    const auto s = ds.trajectories[i].states.data();
    std::copy(s.begin(), s.end(), truth.data().begin() + i * 704);
  }
  const auto m = compute_metrics(pred, truth);
  CHECK(ev.metrics.rmse == doctest::Approx(m.rmse).epsilon(1e-14));
  CHECK(ev.metrics.conserved_error == doctest::Approx(m.conserved_error).epsilon(1e-14));
  CHECK(ev.per_trajectory.size() == 4);
}

TEST_CASE("per-parameter rows follow the split ranges") {
  const auto in = advection(pde::Split::kInDomainTest, 8);
  const auto out = advection(pde::Split::kOutDomainTest, 8);
  const auto model = surrogate(train::ModelKind::kBaseline);
  auto rows = parameter_rows("advection", "baseline", 0, "in_domain_test", in, evaluate_split(model, in));
  for (const auto& r : rows) CHECK((r.beta[0] > 0.0 && r.beta[0] < 0.5));
  const auto out_rows = parameter_rows("advection", "baseline", 0, "out_domain_test", out, evaluate_split(model, out));
  for (const auto& r : out_rows) CHECK((r.beta[0] > 0.5 && r.beta[0] < 1.0));
  rows.insert(rows.end(), out_rows.begin(), out_rows.end());
  const auto csv = parameter_csv(rows, {"beta"});
  CHECK(csv.rfind("equation,model,seed,split,trajectory,beta,rmse\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
}

TEST_CASE("summary over seeds") {
  SUBCASE("one trajectory and one seed leaves std empty") {
    const std::vector<ParameterRow> rows{{"advection", "late_fusion", 0, "in_domain_test", 0, {0.2}, 0.5}};
    const auto s = summarize(rows);
    REQUIRE(s.size() == 1);
    CHECK(s[0].mean == 0.5);
    CHECK_FALSE(s[0].std.has_value());
    CHECK(summary_csv(s) == "equation,model,split,seeds,rmse_mean,rmse_std\nadvection,late_fusion,in_domain_test,1,0.5,\n");
  }
  SUBCASE("three seeds average their pooled RMSE") {
    std::vector<ParameterRow> rows;
    const double per_seed[3][2] = {{0.1, 0.3}, {0.2, 0.2}, {0.5, 0.1}};
    std::vector<double> pooled;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      for (std::size_t t = 0; t < 2; ++t) rows.push_back({"advection", "baseline", seed, "out_domain_test", t, {0.7}, per_seed[seed][t]});
      pooled.push_back(std::sqrt((per_seed[seed][0] * per_seed[seed][0] + per_seed[seed][1] * per_seed[seed][1]) / 2.0));
    }
    const auto s = summarize(rows);
    REQUIRE(s.size() == 1);
    const double mean = (pooled[0] + pooled[1] + pooled[2]) / 3.0;
    CHECK(s[0].mean == doctest::Approx(mean).epsilon(1e-15));
    double ss = 0.0;
    for (double v : pooled) ss += (v - mean) * (v - mean);
    CHECK(*s[0].std == doctest::Approx(std::sqrt(ss / 2.0)).epsilon(1e-14));
  }
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("central-difference reference on a sine") {
  const auto grid = pde::default_grid(pde::EquationFamily::kAdvection, pde::Preset::kFull);
  REQUIRE(grid.points[0] == 128);
  const auto xs = grid.coordinates(0, pde::Boundary::kPeriodic);
  Tensor u({1, 128});
  for (std::size_t i = 0; i < 128; ++i) u[i] = std::sin(2.0 * std::numbers::pi * xs[i]);
  const auto refs = reference_derivatives(u, grid, pde::Boundary::kPeriodic);
  REQUIRE(refs.size() == 2);
  CHECK(refs[0].name == "dx");
  double err_dx = 0.0, err_dxx = 0.0;
  const double k = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < 128; ++i) {
    err_dx = std::max(err_dx, std::abs(refs[0].field[i] - k * std::cos(k * xs[i])));
    err_dxx = std::max(err_dxx, std::abs(refs[1].field[i] + k * k * std::sin(k * xs[i])));
  }
  CHECK(err_dx < 1e-3);
  CHECK(err_dxx < 1e-2);
}

TEST_CASE("no-flow Laplacian reference") {
  pde::GridSpec grid = pde::default_grid(pde::EquationFamily::kReactionDiffusion2D, pde::Preset::kDesk);
  const auto xs = grid.coordinates(0, pde::Boundary::kNeumannNoFlow);
  const auto ys = grid.coordinates(1, pde::Boundary::kNeumannNoFlow);
  const double lx = grid.length(0), ly = grid.length(1);
  const std::size_t nx = xs.size(), ny = ys.size();
  Tensor u({1, nx, ny});
  const double a = std::numbers::pi / lx, b = std::numbers::pi / ly;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      u[i * ny + j] = std::cos(a * (xs[i] - grid.bounds[0].first)) * std::cos(b * (ys[j] - grid.bounds[1].first));
  const auto refs = reference_derivatives(u, grid, pde::Boundary::kNeumannNoFlow);
  REQUIRE(refs.size() == 3);
  CHECK(refs[2].name == "laplacian");
  double err = 0.0;
  for (std::size_t i = 0; i < u.numel(); ++i) err = std::max(err, std::abs(refs[2].field[i] + (a * a + b * b) * u[i]));
  CHECK(err < 0.01 * (a * a + b * b));
}

TEST_CASE("pearson correlation") {
  const std::vector<double> a{1.0, 2.0, 4.0, 3.0};
  std::vector<double> b, c;
  for (double v : a) {
    b.push_back(2.0 * v + 3.0);
    c.push_back(-v);
  }
  CHECK(pearson(a, b) == doctest::Approx(1.0));
  CHECK(pearson(a, c) == doctest::Approx(-1.0));
  CHECK(pearson(a, std::vector<double>(4, 2.0)) == 0.0);
}

TEST_CASE("interpretation of a zero-xi model") {
  const auto model = surrogate(train::ModelKind::kLateFusion);
  const auto grid = pde::default_grid(pde::EquationFamily::kAdvection, pde::Preset::kDesk);
  const Tensor u0 = random_field({1, 64}, 13);
  const std::vector<double> beta{0.25};
  const auto d = interpret(*model.late_fusion(), u0, beta, grid, pde::Boundary::kPeriodic);
  CHECK(d.hidden.shape() == ad::Shape{2, 64});
  CHECK(d.theta.shape() == ad::Shape{2, 64});
  CHECK(d.param_dependent == Tensor({1, 64}));
  CHECK(d.param_free == Tensor({1, 64}));

  const auto ds = advection(pde::Split::kInDomainTest, 2);
  const auto s = advection_interpretability(*model.late_fusion(), ds);
  CHECK(s.states == 0);
  CHECK(s.rms_ratio == 0.0);
}

TEST_CASE("interpretation splits the residual and is written to disk") {
  const auto model = surrogate(train::ModelKind::kLateFusion, 0.2);
  const auto grid = pde::default_grid(pde::EquationFamily::kAdvection, pde::Preset::kDesk);
  const Tensor u0 = random_field({1, 64}, 14);
  const std::vector<double> beta{0.4};
  const auto d = interpret(*model.late_fusion(), u0, beta, grid, pde::Boundary::kPeriodic);
  // With library {h0*beta, h1}: dependent = xi0*beta*h0, free = xi1*h1.
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(d.param_dependent[i] == doctest::Approx(0.2 * 0.4 * d.hidden[i]).epsilon(1e-14));
    CHECK(d.param_free[i] == doctest::Approx(0.2 * d.hidden[64 + i]).epsilon(1e-14));
  }

  TempDir dir("interp");
  write_interpret_dump(dir.path(), d);
  const auto index = nlohmann::json::parse(io::read_text(dir / "index.json"));
  CHECK(index["library"] == "beta*h0, h1");
  std::vector<std::string> names;
  for (const auto& a : index["arrays"]) {
    names.push_back(a["name"].get<std::string>());
    const auto bytes = io::read_file(dir / a["file"].get<std::string>());
    CHECK(io::crc32_hex(bytes) == a["crc32"].get<std::string>());
  }
  CHECK(names == std::vector<std::string>{"u0", "hidden", "theta", "xi", "param_dependent", "param_free",
                                          "reference_dx", "reference_dxx"});
  const auto back = io::decode_f64(io::read_file(dir / "param_dependent.f64"));
  CHECK(std::equal(back.begin(), back.end(), d.param_dependent.data().begin()));
}
