#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "latefuse/fusion/model.hpp"
#include "latefuse/pde/dataset.hpp"

namespace latefuse::eval {

using ad::Tensor;

/// Central difference of f [V, S...] along spatial `axis` (0-based).
/// Periodic grids use the 4th-order stencil; no-flow grids the 2nd-order one
/// with mirrored ghost cells. order is 1 or 2.
Tensor central_difference(const Tensor& f, std::size_t axis, int order, double spacing, pde::Boundary boundary);

struct NamedField {
  std::string name;
  Tensor field;
};

/// 1D: dx, dxx. 2D: dx, dy, laplacian.
std::vector<NamedField> reference_derivatives(const Tensor& u, const pde::GridSpec& grid, pde::Boundary boundary);

/// Everything a late-fusion step computes from one state, plus finite
/// difference references of that state. Fields drop the batch axis.
struct InterpretDump {
  Tensor u0;               // [V, S...]
  std::vector<double> beta;
  Tensor hidden;           // [H, S...]
  Tensor theta;            // [|terms|, S...]
  Tensor xi;               // [|terms|, V]
  Tensor param_dependent;  // [V, S...]
  Tensor param_free;       // [V, S...]
  std::vector<NamedField> references;
  std::string library;
};

InterpretDump interpret(const fusion::LateFusionModel& model, const Tensor& u0, std::span<const double> beta,
                        const pde::GridSpec& grid, pde::Boundary boundary);

/// One little-endian f64 file per array plus index.json (names, shapes,
/// checksums, beta, library).
void write_interpret_dump(const std::filesystem::path& dir, const InterpretDump& dump);

/// Pearson correlation; 0 when either input has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

struct InterpretabilitySummary {
  double mean_abs_pearson = 0.0;  // over states, |corr(param part, -dx u)|
  double rms_ratio = 0.0;         // RMS(param-free) / RMS(param part), pooled over states
  std::size_t states = 0;         // states with a non-degenerate correlation

  nlohmann::ordered_json to_json() const;
};

/// Scores every input state (snapshots 0..T-1) of a 1D single-variable
/// dataset against the late-fusion residual split.
InterpretabilitySummary advection_interpretability(const fusion::LateFusionModel& model, const pde::Dataset& ds);

}  // namespace latefuse::eval
