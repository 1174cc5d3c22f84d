#pragma once

#include <cstdint>
#include <vector>

#include "relucirc/dataset.hpp"
#include "relucirc/mlp.hpp"

namespace relucirc {

/// Regular lattice over an axis-aligned box, both corners included.
/// Axis 0 varies fastest in the linear point index.
struct GridSpec {
  Vector lower;
  Vector upper;
  std::vector<std::size_t> resolution;

  std::size_t dim() const noexcept { return resolution.size(); }
  std::uint64_t total_points() const noexcept;
  double cell_size(std::size_t axis) const;
  /// Smallest cell size over all axes.
  double min_cell_size() const;

  /// Throws InputError unless lower < upper and every resolution >= 2.
  void validate() const;

  void point(std::uint64_t index, Vector& out) const;
  Vector point(std::uint64_t index) const;

  /// Per-axis lattice coordinates of a linear index.
  std::vector<std::size_t> coords(std::uint64_t index) const;

  /// Same box with (res - 1) * factor + 1 points per axis, so every original
  /// point is also a point of the refined grid.
  GridSpec refined(std::size_t factor) const;

  static GridSpec uniform(const Vector& lower, const Vector& upper, std::size_t resolution);
};

/// Bounding box of the data, widened by `expand` times its extent on each side.
GridSpec grid_around(const Dataset& data, std::size_t resolution, double expand = 0.25);
/// Same, around points given column-wise.
GridSpec grid_around(const Matrix& points, std::size_t resolution, double expand = 0.25);

}  // namespace relucirc
