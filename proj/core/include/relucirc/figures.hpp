#pragma once

#include <string>
#include <vector>

#include "relucirc/capacity.hpp"
#include "relucirc/dataset.hpp"
#include "relucirc/interpret.hpp"
#include "relucirc/nsb.hpp"
#include "relucirc/svg.hpp"

namespace relucirc {

/// Line style of hidden layer `layer` (1-based) out of `depth`; the decision
/// boundary always gets the most dotted style.
Style layer_style(std::size_t layer, std::size_t depth);
Style decision_boundary_style();

/// Every NSB plus the decision boundary over the grid box, with the data
/// points (label 1 blue, label 0 red) when `data` is non-null.
Figure nsb_figure(const MlpParams& params, const GridSpec& grid, const Dataset* data, const std::string& title);
Figure nsb_figure(const ArchSpec& arch, const std::vector<NsbPolyline>& nsbs, const GridSpec& grid,
                  const Dataset* data, const std::string& title);

/// VC^Bool, Gamma^Bool and the three norm bounds against training step, log scale.
Figure bound_series_figure(const std::vector<BoundRow>& rows, const std::string& title);

/// One series per data tier: value against architecture index (1-based).
struct NamedSeries {
  std::string name;
  std::vector<double> values;
};
Figure by_architecture_figure(const std::vector<std::string>& arch_names, const std::vector<NamedSeries>& series,
                              const std::string& y_label, const std::string& title);

/// Shaded region where the subcircuit at `path` is True, sampled on a
/// raster x raster lattice over the 2D grid box (row runs merged).
Figure region_figure(const CircuitTree& tree, const NodePath& path, const GridSpec& grid, std::size_t raster,
                     const std::string& title);

/// One 2x10 array per probe (True row over False row, digits 0-9), shaded by
/// fraction and labelled with the percentage.
Figure probe_figure(const std::vector<ProbeArray>& probes, const std::string& title);

}  // namespace relucirc
