#pragma once

#include <array>
#include <vector>

#include "relucirc/grid.hpp"
#include "relucirc/mlp.hpp"

namespace relucirc {

using Point2 = std::array<double, 2>;
using Polyline = std::vector<Point2>;

/// A hidden neuron (layer 1..d, index within the layer) or the output
/// neuron, whose zero set is the decision boundary.
struct NsbTarget {
  std::size_t layer = 0;
  std::size_t index = 0;

  static NsbTarget decision_boundary(const ArchSpec& arch) { return {arch.depth() + 1, 0}; }
  bool is_decision_boundary(const ArchSpec& arch) const { return layer == arch.depth() + 1; }
  friend bool operator==(const NsbTarget&, const NsbTarget&) = default;
};

/// Zero-level curves of one neuron's preactivation. Closed curves repeat
/// their first vertex at the end.
struct NsbPolyline {
  NsbTarget target;
  bool decision_boundary = false;
  std::vector<Polyline> lines;

  std::size_t vertex_count() const;
};

/// Preactivation of `target` at x.
double preactivation(const MlpParams& params, const NsbTarget& target, const Eigen::Ref<const Vector>& x);

/// Marching squares over a 2D grid. Each crossing on a cell edge is first
/// placed by linear interpolation and then refined by bracketed root
/// finding until |preactivation| <= tolerance. Saddle cells are resolved by
/// the sign of the mean of their corners. Throws InputError unless the grid
/// is two-dimensional.
NsbPolyline extract_nsb(const MlpParams& params, const GridSpec& grid, const NsbTarget& target,
                        double tolerance = 1e-6);

/// Every hidden neuron in layer order, then the decision boundary. Neurons
/// whose sign never changes on the grid come back with no lines.
std::vector<NsbPolyline> extract_all_nsbs(const MlpParams& params, const GridSpec& grid, double tolerance = 1e-6);

}  // namespace relucirc
