#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "latefuse/autodiff/ops.hpp"
#include "latefuse/common/error.hpp"
#include "latefuse/fusion/model.hpp"
#include "support/fusion_oracles.hpp"

using namespace latefuse;
using namespace latefuse::fusion;
using latefuse::testing::random_field;

namespace {

const std::vector<std::string> kRd1dParams{"nu", "rho"};
const std::vector<std::string> kBeta{"beta"};

Tensor theta_at(const LibrarySpec& spec, const Tensor& h, const Tensor& beta) {
  ad::NoGradGuard guard;
  return evaluate_library(spec, Variable(h), beta).value();
}

}  // namespace

TEST_CASE("parses the 12-term rd1d library") {
  const auto spec = parse_library_spec(
      "1, h0, h1, h0^2, h1^2, h0*h1, rho*h0^2, rho*h1^2, rho*h0*h1, nu*h0^2, nu*h1^2, nu*h0*h1", kRd1dParams);
  REQUIRE(spec.size() == 12);
  CHECK(spec.hidden_arity == 2);
  CHECK(spec.terms[0].hidden.empty());
  CHECK(spec.terms[0].params.empty());
  CHECK(spec.terms[3].hidden == std::vector<HiddenFactor>{{0, 2, Unary::kIdentity}});
  CHECK(spec.terms[8].params == std::vector<ParamFactor>{{1, 1}});
  const auto dependent = std::count_if(spec.terms.begin(), spec.terms.end(), [](const auto& t) { return t.param_dependent(); });
  CHECK(dependent == 6);
}

TEST_CASE("parses the advection library") {
  const auto spec = parse_library_spec("h0*beta, h1", kBeta);
  REQUIRE(spec.size() == 2);
  CHECK(spec.terms[0].param_dependent());
  CHECK_FALSE(spec.terms[1].param_dependent());
  CHECK(to_string(spec) == "beta*h0, h1");
}

TEST_CASE("library grammar errors") {
  CHECK_THROWS_AS(parse_library_spec("h0^0", kBeta), ConfigError);
  CHECK_THROWS_AS(parse_library_spec("h0, gamma*h1", kBeta), ConfigError);
  CHECK_THROWS_AS(parse_library_spec("h0*h1, h1*h0", kBeta), ConfigError);
  CHECK_THROWS_AS(parse_library_spec("h0, h0*h0, h0^2", kBeta), ConfigError);
  CHECK_THROWS_AS(parse_library_spec("h0, h3", kBeta, 2), ConfigError);
  CHECK_THROWS_AS(parse_library_spec("", kBeta), ConfigError);
  CHECK_THROWS_AS(parse_library_spec("h0,,h1", kBeta), ConfigError);
  CHECK_THROWS_AS(parse_library_spec("1*h0", kBeta), ConfigError);
  CHECK_THROWS_AS(parse_library_spec("sin(beta)", kBeta), ConfigError);
  CHECK_THROWS_AS(parse_library_spec("h", kBeta), ConfigError);
  CHECK_THROWS_AS(parse_library_spec("h0^x", kBeta), ConfigError);
  CHECK_NOTHROW(parse_library_spec("h0, h1", kBeta, 3));
}

TEST_CASE("printer round-trips") {
  for (const char* text : {"1, h0, h1, h0^2, h1^2, h0*h1, rho*h0^2, rho*h1^2, rho*h0*h1, nu*h0^2, nu*h1^2, nu*h0*h1",
                           "  sin( h1 ) * nu^2 , h0*h0*rho, sin(h0)*sin(h0)*h0 , nu*rho, 1"}) {
    const auto spec = parse_library_spec(text, kRd1dParams);
    CHECK(parse_library_spec(to_string(spec), kRd1dParams) == spec);
  }
  const auto spec = parse_library_spec("h1*sin(h0)*sin(h0)*rho*nu", kRd1dParams);
  CHECK(to_string(spec) == "nu*rho*h1*sin(h0)*sin(h0)");
}

TEST_CASE("advection library at h0=2, h1=3, beta=0.5") {
  const auto spec = parse_library_spec("h0*beta, h1", kBeta);
  const Tensor theta = theta_at(spec, Tensor({1, 2, 1}, std::vector<double>{2.0, 3.0}), Tensor({1, 1}, 0.5));
  CHECK(theta.shape() == ad::Shape{1, 2, 1});
  CHECK(theta[0] == 1.0);
  CHECK(theta[1] == 3.0);
}

TEST_CASE("rd2d library with k = 0") {
  const auto spec = parse_library_spec("1, h0, h1, h2, k, k*h0, k*h1, k*h2", {"k"});
  const Tensor theta = theta_at(spec, Tensor({1, 3, 1}, std::vector<double>{0.4, -1.5, 2.5}), Tensor({1, 1}, 0.0));
  const std::vector<double> expect{1.0, 0.4, -1.5, 2.5, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < 8; ++i) CHECK(theta[i] == expect[i]);
}

TEST_CASE("zero hidden fields leave only hidden-free terms") {
  const auto spec = parse_library_spec("1, h0, nu, rho^2, nu*h1, sin(h0), h0*h1", kRd1dParams);
  const Tensor theta = theta_at(spec, Tensor({1, 2, 4}), Tensor({1, 2}, std::vector<double>{0.3, 0.6}));
  for (std::size_t t = 0; t < spec.size(); ++t) {
    const bool hidden_free = spec.terms[t].hidden.empty();
    for (std::size_t x = 0; x < 4; ++x) {
      CHECK((theta[t * 4 + x] != 0.0) == hidden_free);
    }
  }
}

TEST_CASE("library evaluation is pointwise") {
  const auto spec = parse_library_spec("1, h0, h1^2, sin(h0)*h1, nu*h0, rho*nu*h1^3", kRd1dParams);
  const Tensor h = random_field({2, 2, 16}, 3);
  const Tensor beta({2, 2}, std::vector<double>{0.1, 0.2, 0.3, 0.4});
  std::vector<std::size_t> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(5);
  std::shuffle(perm.begin(), perm.end(), rng);
  Tensor hp(h.shape());
  for (std::size_t bc = 0; bc < 4; ++bc)
    for (std::size_t x = 0; x < 16; ++x) hp[bc * 16 + x] = h[bc * 16 + perm[x]];
  const Tensor theta = theta_at(spec, h, beta), theta_p = theta_at(spec, hp, beta);
  for (std::size_t bt = 0; bt < 2 * spec.size(); ++bt)
    for (std::size_t x = 0; x < 16; ++x) CHECK(theta_p[bt * 16 + x] == theta[bt * 16 + perm[x]]);
}

TEST_CASE("parameter homogeneity") {
  const auto spec = parse_library_spec("h0, nu*h0, rho^2*h1, nu*rho^2*h0*h1, nu^3", kRd1dParams);
  const Tensor h = random_field({1, 2, 8}, 4);
  const Tensor beta({1, 2}, std::vector<double>{0.3, 0.7});
  for (double c : {2.0, 0.5, -4.0}) {
    const Tensor scaled({1, 2}, std::vector<double>{0.3 * c, 0.7 * c});
    const Tensor a = theta_at(spec, h, beta), b = theta_at(spec, h, scaled);
    for (std::size_t t = 0; t < spec.size(); ++t) {
      const double factor = std::pow(c, spec.terms[t].param_degree());
      for (std::size_t x = 0; x < 8; ++x) CHECK(b[t * 8 + x] == factor * a[t * 8 + x]);
    }
  }
}

TEST_CASE("non-finite hidden states are rejected") {
  const auto spec = parse_library_spec("h0", kBeta);
  Tensor h({1, 1, 4});
  h[2] = std::nan("");
  CHECK_THROWS_AS(theta_at(spec, h, Tensor({1, 1})), NonFiniteError);
  CHECK_THROWS_AS(theta_at(spec, Tensor({1, 2, 4}), Tensor({1, 1})), ShapeError);
  CHECK_THROWS_AS(theta_at(spec, Tensor({1, 1, 4}), Tensor({1, 2})), ShapeError);
}

namespace {

LateFusionModel advection_model() {
  op::BackboneConfig cfg;
  cfg.in_channels = 1;
  cfg.out_channels = 2;
  cfg.width = 8;
  cfg.modes = 6;
  return LateFusionModel(cfg, parse_library_spec("h0*beta, h1", kBeta), 1, 9);
}

}  // namespace

TEST_CASE("zero xi is the identity step") {
  const auto model = advection_model();
  const Tensor u = random_field({3, 1, 32}, 1);
  ad::NoGradGuard guard;
  const auto f = model.forward(Variable(u), Tensor({3, 1}, 0.4));
  CHECK(f.next.value() == u);
  CHECK(f.parts.param_dependent.value().max_abs() == 0.0);
  CHECK(f.parts.param_free.value().max_abs() == 0.0);
}

TEST_CASE("a single active term gives du = beta * h0") {
  const auto model = advection_model();
  Variable xi = model.xi();
  xi.set_value(Tensor({2, 1}, std::vector<double>{1.0, 0.0}));
  const Tensor u = random_field({2, 1, 32}, 2);
  const Tensor beta({2, 1}, std::vector<double>{0.25, 0.75});
  ad::NoGradGuard guard;
  const auto f = model.forward(Variable(u), beta);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t x = 0; x < 32; ++x) {
      CHECK(f.delta.value()[b * 32 + x] == beta[b] * f.hidden.value()[(b * 2) * 32 + x]);
    }
}

TEST_CASE("residual split matches the two-term partition and sums bitwise") {
  const auto model = advection_model();
  Variable xi = model.xi();
  xi.set_value(Tensor({2, 1}, std::vector<double>{0.7, -1.3}));
  const Tensor u = random_field({2, 1, 32}, 3);
  const Tensor beta({2, 1}, std::vector<double>{0.3, 0.6});
  ad::NoGradGuard guard;
  const auto f = model.forward(Variable(u), beta);
  const Tensor& h = f.hidden.value();
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t x = 0; x < 32; ++x) {
      CHECK(f.parts.param_dependent.value()[b * 32 + x] == doctest::Approx(0.7 * beta[b] * h[(b * 2) * 32 + x]).epsilon(1e-14));
      CHECK(f.parts.param_free.value()[b * 32 + x] == -1.3 * h[(b * 2 + 1) * 32 + x]);
      CHECK(f.parts.param_dependent.value()[b * 32 + x] + f.parts.param_free.value()[b * 32 + x] ==
            f.delta.value()[b * 32 + x]);
    }
  const auto zero_beta = model.forward(Variable(u), Tensor({2, 1}, 0.0));
  CHECK(zero_beta.parts.param_dependent.value().max_abs() == 0.0);
}

TEST_CASE("zero-xi rollout stays at the initial condition") {
  const auto model = advection_model();
  Tensor u = random_field({1, 1, 32}, 4);
  const Tensor u0 = u;
  ad::NoGradGuard guard;
  for (int s = 0; s < 10; ++s) u = model.step(Variable(u), Tensor({1, 1}, 0.9)).value();
  CHECK(u == u0);
}

TEST_CASE("late fusion wiring errors") {
  op::BackboneConfig cfg;
  cfg.out_channels = 3;
  CHECK_THROWS_AS(LateFusionModel(cfg, parse_library_spec("h0*beta, h1", kBeta), 1, 1), ConfigError);
  cfg.out_channels = 2;
  cfg.in_channels = 2;
  CHECK_THROWS_AS(LateFusionModel(cfg, parse_library_spec("h0*beta, h1", kBeta), 1, 1), ConfigError);
}

TEST_CASE("gradients of library evaluation and of a full step") {
  CHECK(latefuse::testing::library_gradient_error() < 1e-4);
  const double err = latefuse::testing::late_fusion_step_gradient_error(
      [target = random_field({2, 1, 16}, 30)](const Variable& pred, const Variable&) {
        return latefuse::testing::mse(pred, target);
      });
  CHECK(err < 1e-4);
}
