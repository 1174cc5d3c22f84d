#include "relucirc/circuit.hpp"

#include <algorithm>
#include <unordered_map>

#include "relucirc/error.hpp"
#include "relucirc/log.hpp"
#include "relucirc/registry.hpp"
#include "relucirc/trie.hpp"

namespace relucirc {

std::string to_string(CircuitMode mode) { return mode == CircuitMode::kNumeric ? "numeric" : "logical"; }

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kMax: return "max";
    case NodeKind::kMin: return "min";
    case NodeKind::kOr: return "or";
    case NodeKind::kAnd: return "and";
    case NodeKind::kLeaf: return "leaf";
  }
  return "?";
}

CircuitMode parse_mode(const std::string& text) {
  if (text == "numeric") return CircuitMode::kNumeric;
  if (text == "logical") return CircuitMode::kLogical;
  throw InputError("unknown circuit mode '" + text + "'");
}

NodeKind parse_kind(const std::string& text) {
  if (text == "max") return NodeKind::kMax;
  if (text == "min") return NodeKind::kMin;
  if (text == "or") return NodeKind::kOr;
  if (text == "and") return NodeKind::kAnd;
  if (text == "leaf") return NodeKind::kLeaf;
  throw FormatError("unknown node kind '" + text + "'");
}

std::size_t CircuitTree::leaf_count(std::uint32_t id) const {
  std::size_t count = 0;
  std::vector<std::uint32_t> stack{id};
  while (!stack.empty()) {
    const std::uint32_t n = stack.back();
    stack.pop_back();
    if (nodes_[n].kind == NodeKind::kLeaf) {
      ++count;
    } else {
      for (auto c : children(n)) stack.push_back(c);
    }
  }
  return count;
}

std::size_t CircuitTree::leaf_count() const { return nodes_.empty() ? 0 : leaf_count(root_); }

std::uint32_t CircuitTree::add_atom(std::span<const double> v) {
  if (v.size() != input_dim_ + 1) throw InputError("atom has wrong length");
  const auto id = static_cast<std::uint32_t>(atom_count());
  atoms_.insert(atoms_.end(), v.begin(), v.end());
  return id;
}

void CircuitTree::set_atoms(std::vector<double> data) {
  if (data.size() % (input_dim_ + 1) != 0) throw InputError("atom table size is not a multiple of input_dim+1");
  atoms_ = std::move(data);
}

std::uint32_t CircuitTree::intern_label(const BitVector& bits) {
  auto [it, inserted] = label_index_.try_emplace(bits, static_cast<std::uint32_t>(labels_.size()));
  if (inserted) labels_.push_back(bits);
  return it->second;
}

std::uint32_t CircuitTree::add_node(NodeKind kind, int layer, std::uint32_t label, std::uint32_t child_count) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  CircuitNode n;
  n.kind = kind;
  n.layer = static_cast<std::int16_t>(layer);
  n.label = label;
  n.count = kind == NodeKind::kLeaf ? 0 : child_count;
  n.first = kind == NodeKind::kLeaf ? 0 : static_cast<std::uint32_t>(children_.size());
  if (kind != NodeKind::kLeaf) children_.resize(children_.size() + child_count, 0);
  nodes_.push_back(n);
  return id;
}

void CircuitTree::reserve(std::size_t nodes, std::size_t children, std::size_t atoms) {
  nodes_.reserve(nodes);
  children_.reserve(children);
  atoms_.reserve(atoms * (input_dim_ + 1));
}

void CircuitTree::validate() const {
  if (nodes_.empty()) throw InputError("circuit has no nodes");
  if (root_ >= nodes_.size()) throw InputError("circuit root out of range");
  std::vector<std::uint8_t> seen(nodes_.size(), 0);
  std::vector<std::uint32_t> stack{root_};
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    if (seen[id]) throw InputError("circuit node " + std::to_string(id) + " is shared");
    seen[id] = 1;
    const CircuitNode& n = nodes_[id];
    if (n.label != kNoLabel && n.label >= labels_.size()) throw InputError("circuit label out of range");
    if (n.kind == NodeKind::kLeaf) {
      if (n.first >= atom_count()) throw InputError("circuit leaf refers to a missing atom");
      continue;
    }
    if (n.count == 0) throw InputError("internal circuit node without children");
    if (static_cast<std::size_t>(n.first) + n.count > children_.size()) throw InputError("child slice out of range");
    for (auto c : children(id)) {
      if (c >= nodes_.size()) throw InputError("circuit child out of range");
      stack.push_back(c);
    }
  }
}

namespace {

struct TreeBuilder {
  const StateTrie& trie;
  CircuitTree& tree;
  NodeKind join_max;
  NodeKind join_min;
  std::size_t n;

  std::uint32_t label_of(std::uint32_t trie_node) {
    return tree.intern_label(trie.node(trie_node).label);
  }

  // Max node over mu-children of `a`, each paired with the tau suffix node `b`.
  std::uint32_t max_node(std::uint32_t a, std::uint32_t b, int layer, std::uint32_t label) {
    const auto& kids = trie.node(a).children;
    const std::uint32_t id = tree.add_node(join_max, layer, label, static_cast<std::uint32_t>(kids.size()));
    for (std::uint32_t i = 0; i < kids.size(); ++i) tree.set_child(id, i, min_node(kids[i], b));
    return id;
  }

  std::uint32_t min_node(std::uint32_t a, std::uint32_t b) {
    const auto& an = trie.node(a);
    const auto& kids = trie.node(b).children;
    const std::uint32_t id =
        tree.add_node(join_min, static_cast<int>(an.layer), label_of(a), static_cast<std::uint32_t>(kids.size()));
    for (std::uint32_t j = 0; j < kids.size(); ++j) {
      const auto& bn = trie.node(kids[j]);
      std::uint32_t child;
      if (bn.layer == 1) {
        child = tree.add_node(NodeKind::kLeaf, 1, label_of(kids[j]), 0);
        tree.set_leaf_atom(child, an.state * static_cast<std::uint32_t>(n) + bn.state);
      } else {
        child = max_node(a, kids[j], static_cast<int>(bn.layer), label_of(kids[j]));
      }
      tree.set_child(id, j, child);
    }
    return id;
  }
};

}  // namespace

CircuitTree build_tree(const MlpParams& params, std::span<const NetworkState> states, CircuitMode mode,
                       const BuildOptions& options) {
  params.validate();
  std::vector<NetworkState> sorted(states.begin(), states.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.empty()) throw InputError("cannot build a circuit over an empty state set");
  const std::uint64_t n = sorted.size();
  if (n * n > options.max_leaves) {
    throw ResourceError("circuit over " + std::to_string(n) + " states would have " + std::to_string(n * n) +
                        " leaves, budget is " + std::to_string(options.max_leaves));
  }

  const StateTrie trie(params.arch, sorted);
  CircuitTree tree(mode, params.arch.input_dim);
  tree.set_atoms(all_pair_atoms(params, sorted));

  tree.reserve(static_cast<std::size_t>(n * n * 3 / 2), static_cast<std::size_t>(n * n * 3 / 2), 0);

  const NodeKind jmax = mode == CircuitMode::kNumeric ? NodeKind::kMax : NodeKind::kOr;
  const NodeKind jmin = mode == CircuitMode::kNumeric ? NodeKind::kMin : NodeKind::kAnd;
  TreeBuilder builder{trie, tree, jmax, jmin, static_cast<std::size_t>(n)};
  // The root branches on layer d; it is the (mu-root, tau-root) pair.
  const std::uint32_t root = builder.max_node(0, 0, static_cast<int>(params.arch.depth()) + 1, CircuitTree::kNoLabel);
  tree.set_root(root);
  tree.set_index_states(std::move(sorted));
  return tree;
}

CircuitTree build_numeric_tree(const MlpParams& params, const StateRegistry& registry, const BuildOptions& options) {
  return build_tree(params, registry.sigma_bar(), CircuitMode::kNumeric, options);
}

CircuitTree build_logical_tree(const MlpParams& params, const StateRegistry& registry, const BuildOptions& options) {
  const auto zero = registry.sigma_zero();
  if (!zero.empty()) return build_tree(params, zero, CircuitMode::kLogical, options);
  if (registry.empty()) throw InputError("cannot build a circuit from an empty registry");
  const Vector& rep = registry.entries().front().representative;
  const double value = forward(params, rep).output;
  log_warning("no boundary states: the network has one sign on the enumerated region; emitting a constant circuit");
  return constant_tree(params.arch.input_dim, value);
}

CircuitTree leaf_tree(const AffineAtom& atom, CircuitMode mode) {
  CircuitTree tree(mode, atom.input_dim());
  const auto a = tree.add_atom(std::span<const double>(atom.v.data(), static_cast<std::size_t>(atom.v.size())));
  const auto leaf = tree.add_node(NodeKind::kLeaf, 0, CircuitTree::kNoLabel, 0);
  tree.set_leaf_atom(leaf, a);
  tree.set_root(leaf);
  return tree;
}

CircuitTree constant_tree(std::size_t input_dim, double value, CircuitMode mode) {
  AffineAtom atom{Vector::Zero(static_cast<Eigen::Index>(input_dim) + 1)};
  atom.v[static_cast<Eigen::Index>(input_dim)] = value;
  return leaf_tree(atom, mode);
}

}  // namespace relucirc
