#include "latefuse/pde/equation.hpp"

#include "latefuse/common/error.hpp"

namespace latefuse::pde {

std::string to_string(EquationFamily f) {
  switch (f) {
    case EquationFamily::kAdvection: return "advection";
    case EquationFamily::kBurgers: return "burgers";
    case EquationFamily::kReactionDiffusion1D: return "rd1d";
    case EquationFamily::kReactionDiffusion2D: return "rd2d";
  }
  return "?";
}

EquationFamily parse_family(const std::string& s) {
  if (s == "advection") return EquationFamily::kAdvection;
  if (s == "burgers") return EquationFamily::kBurgers;
  if (s == "rd1d" || s == "reaction_diffusion_1d") return EquationFamily::kReactionDiffusion1D;
  if (s == "rd2d" || s == "reaction_diffusion_2d") return EquationFamily::kReactionDiffusion2D;
  throw ConfigError("unknown equation family '" + s + "'");
}

EquationFamily EquationSpec::family() const {
  return static_cast<EquationFamily>(terms.index());
}

void EquationSpec::validate() const {
  const auto fam = family();
  if (boundary != default_boundary(fam)) {
    throw ConfigError("equation " + to_string(fam) + " requires " + to_string(default_boundary(fam)) +
                      " boundaries");
  }
  if (const auto* b = std::get_if<Burgers>(&terms); b && b->nu < 0.0) {
    throw ConfigError("burgers: nu must be >= 0");
  }
  if (const auto* r = std::get_if<ReactionDiffusion1D>(&terms); r && r->nu < 0.0) {
    throw ConfigError("rd1d: nu must be >= 0");
  }
  if (const auto* r = std::get_if<ReactionDiffusion2D>(&terms); r && (r->du < 0.0 || r->dv < 0.0)) {
    throw ConfigError("rd2d: diffusion coefficients must be >= 0");
  }
}

EquationSpec make_equation(EquationFamily family, std::span<const double> params) {
  if (params.size() != parameter_names(family).size()) {
    throw ConfigError("equation " + to_string(family) + " expects " +
                      std::to_string(parameter_names(family).size()) + " parameters");
  }
  EquationSpec eq;
  eq.boundary = default_boundary(family);
  switch (family) {
    case EquationFamily::kAdvection: eq.terms = Advection{params[0]}; break;
    case EquationFamily::kBurgers: eq.terms = Burgers{params[0]}; break;
    case EquationFamily::kReactionDiffusion1D: eq.terms = ReactionDiffusion1D{params[0], params[1]}; break;
    case EquationFamily::kReactionDiffusion2D: eq.terms = ReactionDiffusion2D{params[0]}; break;
  }
  eq.validate();
  return eq;
}

std::vector<double> parameter_vector(const EquationSpec& eq) {
  return std::visit(
      [](const auto& t) -> std::vector<double> {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Advection>) return {t.beta};
        if constexpr (std::is_same_v<T, Burgers>) return {t.nu};
        if constexpr (std::is_same_v<T, ReactionDiffusion1D>) return {t.nu, t.rho};
        if constexpr (std::is_same_v<T, ReactionDiffusion2D>) return {t.k};
      },
      eq.terms);
}

std::vector<std::string> parameter_names(EquationFamily family) {
  switch (family) {
    case EquationFamily::kAdvection: return {"beta"};
    case EquationFamily::kBurgers: return {"nu"};
    case EquationFamily::kReactionDiffusion1D: return {"nu", "rho"};
    case EquationFamily::kReactionDiffusion2D: return {"k"};
  }
  return {};
}

std::size_t state_variables(EquationFamily family) {
  return family == EquationFamily::kReactionDiffusion2D ? 2 : 1;
}

std::size_t spatial_dims(EquationFamily family) {
  return family == EquationFamily::kReactionDiffusion2D ? 2 : 1;
}

Boundary default_boundary(EquationFamily family) {
  return family == EquationFamily::kReactionDiffusion2D ? Boundary::kNeumannNoFlow : Boundary::kPeriodic;
}

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kInDomainTest: return "in_domain_test";
    case Split::kOutDomainTest: return "out_domain_test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "in_domain_test" || s == "in") return Split::kInDomainTest;
  if (s == "out_domain_test" || s == "out") return Split::kOutDomainTest;
  throw ConfigError("unknown split '" + s + "'");
}

std::vector<ParameterRange> default_ranges(EquationFamily family, Split split) {
  const bool out = split == Split::kOutDomainTest;
  switch (family) {
    case EquationFamily::kAdvection:
      return {out ? ParameterRange{"beta", 0.5, 1.0} : ParameterRange{"beta", 0.0, 0.5}};
    case EquationFamily::kBurgers:
      return {out ? ParameterRange{"nu", 0.0, 0.01} : ParameterRange{"nu", 0.01, 0.02}};
    case EquationFamily::kReactionDiffusion1D:
      return {out ? ParameterRange{"nu", 0.1, 0.2} : ParameterRange{"nu", 0.0, 0.1},
              ParameterRange{"rho", 0.0, 1.0}};
    case EquationFamily::kReactionDiffusion2D:
      return {out ? ParameterRange{"k", 0.05, 0.075} : ParameterRange{"k", 0.0, 0.05}};
  }
  return {};
}

std::string to_string(Preset p) { return p == Preset::kDesk ? "desk" : "full"; }

Preset parse_preset(const std::string& s) {
  if (s == "desk") return Preset::kDesk;
  if (s == "full") return Preset::kFull;
  throw ConfigError("unknown preset '" + s + "' (expected desk|full)");
}

GridSpec default_grid(EquationFamily family, Preset preset) {
  const bool desk = preset == Preset::kDesk;
  GridSpec g;
  switch (family) {
    case EquationFamily::kAdvection:
      g.points = {desk ? 64u : 128u};
      g.bounds = {{0.0, 1.0}};
      g.snapshot_dt = 0.05;
      g.horizon = 0.5;
      break;
    case EquationFamily::kBurgers:
      g.points = {desk ? 64u : 128u};
      g.bounds = {{0.0, 1.0}};
      g.snapshot_dt = 0.005;
      g.horizon = 0.5;
      break;
    case EquationFamily::kReactionDiffusion1D:
      g.points = {desk ? 64u : 128u};
      g.bounds = {{0.0, 1.0}};
      g.snapshot_dt = 0.005;
      g.horizon = 0.5;
      g.internal_substeps = 50;  // split step 1e-4
      break;
    case EquationFamily::kReactionDiffusion2D:
      g.spatial_dims = 2;
      g.points = {desk ? 32u : 64u, desk ? 32u : 64u};
      g.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
      g.snapshot_dt = 0.1;
      g.horizon = 4.0;
      break;
  }
  return g;
}

std::size_t SplitCounts::of(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kInDomainTest: return in_domain_test;
    case Split::kOutDomainTest: return out_domain_test;
  }
  return 0;
}

SplitCounts default_counts(Preset preset) {
  return preset == Preset::kDesk ? SplitCounts{40, 20, 20} : SplitCounts{100, 50, 50};
}

}  // namespace latefuse::pde
