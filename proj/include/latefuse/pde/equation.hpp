#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "latefuse/pde/grid.hpp"

namespace latefuse::pde {

enum class EquationFamily { kAdvection, kBurgers, kReactionDiffusion1D, kReactionDiffusion2D };

std::string to_string(EquationFamily f);
/// Accepts advection, burgers, rd1d, rd2d.
EquationFamily parse_family(const std::string& s);

/// du/dt = -beta du/dx
struct Advection {
  double beta = 0.0;
};
/// du/dt = -d/dx(u^2/2) + nu*pi d2u/dx2
struct Burgers {
  double nu = 0.0;
};
/// Fisher-KPP: du/dt = nu d2u/dx2 + rho u (1 - u)
struct ReactionDiffusion1D {
  double nu = 0.0;
  double rho = 0.0;
};
/// FitzHugh-Nagumo:
///   du/dt = Du Lap u + u - u^3 - k - v
///   dv/dt = Dv Lap v + u - v
struct ReactionDiffusion2D {
  double k = 0.0;
  double du = 1e-3;
  double dv = 5e-3;
};

struct EquationSpec {
  std::variant<Advection, Burgers, ReactionDiffusion1D, ReactionDiffusion2D> terms;
  Boundary boundary = Boundary::kPeriodic;

  EquationFamily family() const;
  void validate() const;
};

/// Builds the equation of `family` from its parameter vector (order given
/// by parameter_names) with the family's boundary condition.
EquationSpec make_equation(EquationFamily family, std::span<const double> params);
std::vector<double> parameter_vector(const EquationSpec& eq);

std::vector<std::string> parameter_names(EquationFamily family);
std::size_t state_variables(EquationFamily family);
std::size_t spatial_dims(EquationFamily family);
Boundary default_boundary(EquationFamily family);

enum class Split { kTrain, kInDomainTest, kOutDomainTest };
std::string to_string(Split s);
Split parse_split(const std::string& s);

struct ParameterRange {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const ParameterRange&, const ParameterRange&) = default;
};

/// Sampling ranges: train and in-domain test share the in-domain ranges.
std::vector<ParameterRange> default_ranges(EquationFamily family, Split split);

enum class Preset { kDesk, kFull };
std::string to_string(Preset p);
Preset parse_preset(const std::string& s);

GridSpec default_grid(EquationFamily family, Preset preset);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t in_domain_test = 0;
  std::size_t out_domain_test = 0;
  std::size_t of(Split s) const;
};
SplitCounts default_counts(Preset preset);

}  // namespace latefuse::pde
