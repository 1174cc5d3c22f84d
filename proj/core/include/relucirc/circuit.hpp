#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relucirc/mlp.hpp"
#include "relucirc/operand.hpp"

namespace relucirc {

class StateRegistry;

enum class CircuitMode { kNumeric, kLogical };
enum class NodeKind : std::uint8_t { kMax, kMin, kOr, kAnd, kLeaf };

std::string to_string(CircuitMode mode);
std::string to_string(NodeKind kind);
CircuitMode parse_mode(const std::string& text);
NodeKind parse_kind(const std::string& text);

/// Max/Or nodes combine children by max (numeric) or disjunction (logical);
/// Min/And by min or conjunction. A logical circuit read numerically is the
/// corresponding max/min tree, and its sign agrees with the Boolean value.
inline bool is_join_max(NodeKind k) { return k == NodeKind::kMax || k == NodeKind::kOr; }

struct CircuitNode {
  NodeKind kind = NodeKind::kLeaf;
  std::int16_t layer = 0;      // layer of the state bits in `label`
  std::uint32_t label = 0;     // index into CircuitTree::labels(), kNoLabel if none
  std::uint32_t first = 0;     // first child slot, or atom id for a leaf
  std::uint32_t count = 0;     // number of children (0 for a leaf)
};

/// Alternating max/min (or OR/AND) tree with affine atoms at the leaves.
/// Nodes live in one array; each internal node owns a contiguous slice of
/// the child-index array. Atoms are stored flat, input_dim + 1 doubles each.
class CircuitTree {
 public:
  static constexpr std::uint32_t kNoLabel = 0xffffffffu;

  CircuitTree() = default;
  CircuitTree(CircuitMode mode, std::size_t input_dim) : mode_(mode), input_dim_(input_dim) {}

  CircuitMode mode() const noexcept { return mode_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::uint32_t root() const noexcept { return root_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t atom_count() const noexcept { return atoms_.size() / (input_dim_ + 1); }
  std::size_t leaf_count() const;
  std::size_t leaf_count(std::uint32_t node) const;

  const CircuitNode& node(std::uint32_t id) const { return nodes_[id]; }
  std::span<const std::uint32_t> children(std::uint32_t id) const {
    const CircuitNode& n = nodes_[id];
    return {children_.data() + n.first, n.count};
  }
  std::span<const double> atom(std::uint32_t id) const {
    return {atoms_.data() + static_cast<std::size_t>(id) * (input_dim_ + 1), input_dim_ + 1};
  }
  double atom_value(std::uint32_t id, const double* x) const {
    const double* a = atoms_.data() + static_cast<std::size_t>(id) * (input_dim_ + 1);
    double s = a[input_dim_];
    for (std::size_t j = 0; j < input_dim_; ++j) s += a[j] * x[j];
    return s;
  }
  const std::vector<double>& atom_data() const noexcept { return atoms_; }

  const BitVector& label(std::uint32_t id) const { return labels_[id]; }
  std::size_t label_count() const noexcept { return labels_.size(); }

  /// States the tree was indexed by (empty for edited or constant trees).
  const std::vector<NetworkState>& index_states() const noexcept { return states_; }

  /// Appends nodes/atoms; used by builders, editors and readers.
  std::uint32_t add_atom(std::span<const double> coefficients_then_constant);
  std::uint32_t intern_label(const BitVector& bits);
  std::uint32_t add_node(NodeKind kind, int layer, std::uint32_t label, std::uint32_t child_count);
  void set_child(std::uint32_t node, std::uint32_t slot, std::uint32_t child) {
    children_[nodes_[node].first + slot] = child;
  }
  void set_leaf_atom(std::uint32_t node, std::uint32_t atom) { nodes_[node].first = atom; }
  void set_root(std::uint32_t id) { root_ = id; }
  void set_index_states(std::vector<NetworkState> states) { states_ = std::move(states); }
  void set_mode(CircuitMode mode) { mode_ = mode; }
  void reserve(std::size_t nodes, std::size_t children, std::size_t atoms);
  /// Bulk-assigns the atom table (atom count = data.size() / (input_dim+1)).
  void set_atoms(std::vector<double> data);

  /// Throws InputError when child indices, atom ids or labels are out of
  /// range or a node is reachable twice.
  void validate() const;

 private:
  CircuitMode mode_ = CircuitMode::kLogical;
  std::size_t input_dim_ = 0;
  std::uint32_t root_ = 0;
  std::vector<CircuitNode> nodes_;
  std::vector<std::uint32_t> children_;
  std::vector<double> atoms_;
  std::vector<BitVector> labels_;
  std::unordered_map<BitVector, std::uint32_t, BitVectorHash> label_index_;
  std::vector<NetworkState> states_;
};

struct BuildOptions {
  std::uint64_t max_leaves = 50'000'000;
};

/// Builds the trie-indexed tree over `states` (deduplicated and sorted
/// internally): Max/Or at mu levels and Min/And at tau levels, descending
/// from layer d to layer 1, with the atom F^d(mu, tau) at each of the
/// |S|^2 leaves. Numeric trees use Max/Min, logical trees Or/And.
/// Throws InputError for an empty state list, ResourceError beyond max_leaves.
CircuitTree build_tree(const MlpParams& params, std::span<const NetworkState> states, CircuitMode mode,
                       const BuildOptions& options = {});

/// Numeric tree over all realized states.
CircuitTree build_numeric_tree(const MlpParams& params, const StateRegistry& registry,
                               const BuildOptions& options = {});

/// Logical tree over the boundary states. When there are none the network
/// never changes sign on the enumerated region; the result is a single
/// constant leaf carrying N at a representative input, and a warning is logged.
CircuitTree build_logical_tree(const MlpParams& params, const StateRegistry& registry,
                               const BuildOptions& options = {});

/// A one-leaf tree.
CircuitTree leaf_tree(const AffineAtom& atom, CircuitMode mode = CircuitMode::kLogical);
CircuitTree constant_tree(std::size_t input_dim, double value, CircuitMode mode = CircuitMode::kLogical);

}  // namespace relucirc
