#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace latefuse::pde {

enum class Boundary { kPeriodic, kNeumannNoFlow };

std::string to_string(Boundary b);
Boundary parse_boundary(const std::string& s);

/// Uniform tensor-product grid plus snapshot cadence.
///
/// Periodic grids place points at a + i*L/n (the right end is the image of
/// the left). No-flow grids are cell centred: a + (i + 1/2) * L/n.
struct GridSpec {
  std::size_t spatial_dims = 1;
  std::vector<std::size_t> points;                 // per dim, >= 4
  std::vector<std::pair<double, double>> bounds;   // per dim
  double snapshot_dt = 0.05;
  double horizon = 0.5;
  std::size_t internal_substeps = 1;               // minimum solver steps per snapshot

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  std::size_t num_steps() const;  // horizon / snapshot_dt
  std::size_t num_snapshots() const { return num_steps() + 1; }
  std::size_t num_points() const;  // product over dims
  double length(std::size_t dim) const { return bounds.at(dim).second - bounds.at(dim).first; }
  double spacing(std::size_t dim) const { return length(dim) / static_cast<double>(points.at(dim)); }
  std::vector<double> coordinates(std::size_t dim, Boundary boundary) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

}  // namespace latefuse::pde
