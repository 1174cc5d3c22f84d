#pragma once

#include <string>
#include <vector>

#include "relucirc/circuit.hpp"
#include "relucirc/grid.hpp"

namespace relucirc {

/// Child indices from the root; empty means the root itself.
using NodePath = std::vector<std::size_t>;

/// "root" or "" is the root; otherwise dot-separated child indices, e.g. "2.0".
NodePath parse_node_path(const std::string& text);
std::string to_string(const NodePath& path);

/// Node id at `path`; throws InputError if the path leaves the tree.
std::uint32_t node_at(const CircuitTree& tree, const NodePath& path);

/// Copy of the subtree under `node` as a standalone tree (unused atoms dropped).
CircuitTree extract_subtree(const CircuitTree& tree, std::uint32_t node);

/// Replaces the subtree at `path` with `replacement`. Every other node keeps
/// its kind, label and atom. Both trees must share the input dimension.
CircuitTree splice(const CircuitTree& tree, const NodePath& path, const CircuitTree& replacement);

struct SimplifyResult {
  CircuitTree tree;
  bool verified = false;
  std::string diagnostic;
  std::size_t leaves_before = 0;
  std::size_t leaves_after = 0;
};

/// Absorption-based pruning driven by truth tables over `probes` (columns).
/// An OR child whose true-set is contained in a kept sibling's is dropped,
/// dually for AND; equal-kind chains are flattened and single-child nodes
/// collapsed. The result is checked against the network on `grid`: it must
/// give the network's sign wherever the input tree does. On failure the
/// input tree is returned with verified = false and a diagnostic.
SimplifyResult simplify(const CircuitTree& tree, const Matrix& probes, const MlpParams& params,
                        const GridSpec& grid);

/// The pruning step alone, without the network check.
CircuitTree simplify_on_probes(const CircuitTree& tree, const Matrix& probes);

}  // namespace relucirc
