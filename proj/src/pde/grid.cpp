#include "latefuse/pde/grid.hpp"

#include <cmath>

#include "latefuse/common/error.hpp"

namespace latefuse::pde {

std::string to_string(Boundary b) {
  return b == Boundary::kPeriodic ? "periodic" : "neumann_no_flow";
}

Boundary parse_boundary(const std::string& s) {
  if (s == "periodic") return Boundary::kPeriodic;
  if (s == "neumann_no_flow") return Boundary::kNeumannNoFlow;
  throw ConfigError("unknown boundary '" + s + "'");
}

void GridSpec::validate() const {
  if (spatial_dims != 1 && spatial_dims != 2) throw ConfigError("grid: spatial_dims must be 1 or 2");
  if (points.size() != spatial_dims || bounds.size() != spatial_dims) {
    throw ConfigError("grid: points/bounds must have one entry per spatial dim");
  }
  for (std::size_t d = 0; d < spatial_dims; ++d) {
    if (points[d] < 4) throw ConfigError("grid: need at least 4 points per dim");
    if (!(bounds[d].second > bounds[d].first)) throw ConfigError("grid: empty domain interval");
  }
  if (!(snapshot_dt > 0.0)) throw ConfigError("grid: snapshot_dt must be positive");
  if (!(horizon > 0.0)) throw ConfigError("grid: horizon must be positive");
  const double ratio = horizon / snapshot_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("grid: horizon must be an integer multiple of snapshot_dt");
  }
  if (internal_substeps < 1) throw ConfigError("grid: internal_substeps must be >= 1");
}

std::size_t GridSpec::num_steps() const {
  return static_cast<std::size_t>(std::llround(horizon / snapshot_dt));
}

std::size_t GridSpec::num_points() const {
  std::size_t n = 1;
  for (auto p : points) n *= p;
  return n;
}

std::vector<double> GridSpec::coordinates(std::size_t dim, Boundary boundary) const {
  const std::size_t n = points.at(dim);
  const double a = bounds.at(dim).first;
  const double dx = spacing(dim);
  const double offset = boundary == Boundary::kPeriodic ? 0.0 : 0.5;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = a + (static_cast<double>(i) + offset) * dx;
  return x;
}

}  // namespace latefuse::pde
