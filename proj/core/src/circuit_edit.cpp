#include "relucirc/circuit_edit.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "relucirc/circuit_eval.hpp"
#include "relucirc/error.hpp"

namespace relucirc {

NodePath parse_node_path(const std::string& text) {
  NodePath path;
  if (text.empty() || text == "root") return path;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw InputError("malformed node path '" + text + "'");
    }
    path.push_back(std::stoul(part));
  }
  return path;
}

std::string to_string(const NodePath& path) {
  if (path.empty()) return "root";
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(path[i]);
  }
  return s;
}

std::uint32_t node_at(const CircuitTree& tree, const NodePath& path) {
  std::uint32_t id = tree.root();
  for (std::size_t step = 0; step < path.size(); ++step) {
    const auto kids = tree.children(id);
    if (path[step] >= kids.size()) {
      throw InputError("node path " + to_string(path) + " leaves the tree at step " + std::to_string(step));
    }
    id = kids[path[step]];
  }
  return id;
}

namespace {

// Copies `node` of `src` into `dst`, reusing atoms already copied.
std::uint32_t copy_into(const CircuitTree& src, std::uint32_t node, CircuitTree& dst,
                        std::unordered_map<std::uint32_t, std::uint32_t>& atom_map) {
  const CircuitNode& n = src.node(node);
  const std::uint32_t label = n.label == CircuitTree::kNoLabel ? CircuitTree::kNoLabel : dst.intern_label(src.label(n.label));
  if (n.kind == NodeKind::kLeaf) {
    auto it = atom_map.find(n.first);
    if (it == atom_map.end()) it = atom_map.emplace(n.first, dst.add_atom(src.atom(n.first))).first;
    const std::uint32_t id = dst.add_node(NodeKind::kLeaf, n.layer, label, 0);
    dst.set_leaf_atom(id, it->second);
    return id;
  }
  const auto kids = src.children(node);
  const std::uint32_t id = dst.add_node(n.kind, n.layer, label, static_cast<std::uint32_t>(kids.size()));
  for (std::uint32_t i = 0; i < kids.size(); ++i) dst.set_child(id, i, copy_into(src, kids[i], dst, atom_map));
  return id;
}

}  // namespace

CircuitTree extract_subtree(const CircuitTree& tree, std::uint32_t node) {
  if (node >= tree.node_count()) throw InputError("node id out of range");
  CircuitTree out(tree.mode(), tree.input_dim());
  std::unordered_map<std::uint32_t, std::uint32_t> atoms;
  out.set_root(copy_into(tree, node, out, atoms));
  return out;
}

CircuitTree splice(const CircuitTree& tree, const NodePath& path, const CircuitTree& replacement) {
  if (replacement.input_dim() != tree.input_dim()) throw InputError("replacement circuit has a different input dimension");
  node_at(tree, path);  // validates the path
  CircuitTree out(tree.mode(), tree.input_dim());
  std::unordered_map<std::uint32_t, std::uint32_t> host_atoms;
  std::unordered_map<std::uint32_t, std::uint32_t> new_atoms;

  auto rec = [&](auto&& self, std::uint32_t node, std::size_t depth) -> std::uint32_t {
    if (depth == path.size()) return copy_into(replacement, replacement.root(), out, new_atoms);
    const CircuitNode& n = tree.node(node);
    const std::uint32_t label = n.label == CircuitTree::kNoLabel ? CircuitTree::kNoLabel : out.intern_label(tree.label(n.label));
    const auto kids = tree.children(node);
    const std::uint32_t id = out.add_node(n.kind, n.layer, label, static_cast<std::uint32_t>(kids.size()));
    for (std::uint32_t i = 0; i < kids.size(); ++i) {
      const std::uint32_t child =
          i == path[depth] ? self(self, kids[i], depth + 1) : copy_into(tree, kids[i], out, host_atoms);
      out.set_child(id, i, child);
    }
    return id;
  };
  out.set_root(rec(rec, tree.root(), 0));
  return out;
}

namespace {

using Bits = std::vector<std::uint64_t>;

bool subset_of(const Bits& a, const Bits& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] & ~b[i]) return false;
  }
  return true;
}

std::size_t popcount(const Bits& a) {
  std::size_t c = 0;
  for (auto w : a) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

struct Expr {
  NodeKind kind = NodeKind::kLeaf;
  int layer = 0;
  std::uint32_t label = CircuitTree::kNoLabel;  // label id in the source tree
  std::uint32_t atom = 0;                       // source atom id for leaves
  std::vector<Expr> kids;
};

struct Pruner {
  const CircuitTree& tree;
  TreeEvaluator eval;
  const Matrix& probes;

  std::pair<Expr, Bits> run(std::uint32_t id) {
    const CircuitNode& n = tree.node(id);
    if (n.kind == NodeKind::kLeaf) {
      return {Expr{NodeKind::kLeaf, n.layer, n.label, n.first, {}}, eval.truth_bits(id, probes)};
    }
    const auto ids = tree.children(id);
    std::vector<Expr> exprs;
    std::vector<Bits> bits;
    for (auto c : ids) {
      auto [e, b] = run(c);
      exprs.push_back(std::move(e));
      bits.push_back(std::move(b));
    }
    const bool is_or = is_join_max(n.kind);
    std::vector<std::size_t> order(exprs.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> pop(exprs.size());
    for (std::size_t i = 0; i < exprs.size(); ++i) pop[i] = popcount(bits[i]);
    // Strongest candidates first: largest true-sets for OR, smallest for AND.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return is_or ? pop[a] > pop[b] : pop[a] < pop[b]; });
    std::vector<std::size_t> kept;
    for (auto c : order) {
      bool absorbed = false;
      for (auto k : kept) {
        absorbed = is_or ? subset_of(bits[c], bits[k]) : subset_of(bits[k], bits[c]);
        if (absorbed) break;
      }
      if (!absorbed) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end());

    Bits acc = bits[kept[0]];
    for (std::size_t i = 1; i < kept.size(); ++i) {
      for (std::size_t w = 0; w < acc.size(); ++w) {
        acc[w] = is_or ? (acc[w] | bits[kept[i]][w]) : (acc[w] & bits[kept[i]][w]);
      }
    }
    if (kept.size() == 1) return {std::move(exprs[kept[0]]), std::move(acc)};

    Expr out{n.kind, n.layer, n.label, 0, {}};
    for (auto k : kept) {
      Expr& e = exprs[k];
      if (e.kind != NodeKind::kLeaf && is_join_max(e.kind) == is_or) {
        for (auto& g : e.kids) out.kids.push_back(std::move(g));
      } else {
        out.kids.push_back(std::move(e));
      }
    }
    return {std::move(out), std::move(acc)};
  }
};

std::uint32_t emit(const CircuitTree& src, const Expr& e, CircuitTree& dst,
                   std::unordered_map<std::uint32_t, std::uint32_t>& atom_map) {
  const std::uint32_t label = e.label == CircuitTree::kNoLabel ? CircuitTree::kNoLabel : dst.intern_label(src.label(e.label));
  if (e.kind == NodeKind::kLeaf) {
    auto it = atom_map.find(e.atom);
    if (it == atom_map.end()) it = atom_map.emplace(e.atom, dst.add_atom(src.atom(e.atom))).first;
    const std::uint32_t id = dst.add_node(NodeKind::kLeaf, e.layer, label, 0);
    dst.set_leaf_atom(id, it->second);
    return id;
  }
  const std::uint32_t id = dst.add_node(e.kind, e.layer, label, static_cast<std::uint32_t>(e.kids.size()));
  for (std::uint32_t i = 0; i < e.kids.size(); ++i) dst.set_child(id, i, emit(src, e.kids[i], dst, atom_map));
  return id;
}

}  // namespace

CircuitTree simplify_on_probes(const CircuitTree& tree, const Matrix& probes) {
  tree.validate();
  if (static_cast<std::size_t>(probes.rows()) != tree.input_dim()) throw InputError("probe dimension does not match circuit");
  if (probes.cols() == 0) return tree;
  Pruner pruner{tree, TreeEvaluator(tree), probes};
  const Expr e = pruner.run(tree.root()).first;
  CircuitTree out(tree.mode(), tree.input_dim());
  std::unordered_map<std::uint32_t, std::uint32_t> atoms;
  out.set_root(emit(tree, e, out, atoms));
  return out;
}

SimplifyResult simplify(const CircuitTree& tree, const Matrix& probes, const MlpParams& params, const GridSpec& grid) {
  if (tree.mode() != CircuitMode::kLogical) throw InputError("simplify expects a logical circuit");
  SimplifyResult result;
  result.leaves_before = tree.leaf_count();
  CircuitTree candidate = simplify_on_probes(tree, probes);

  grid.validate();
  if (grid.dim() != tree.input_dim()) throw InputError("grid dimension does not match circuit");
  const std::uint64_t total = grid.total_points();
  TreeEvaluator before(tree);
  TreeEvaluator after(candidate);
  Evaluator net(params);
  const std::uint64_t chunk = 1 << 14;
  Matrix pts;
  Vector x;
  std::uint64_t failures = 0;
  std::string first_failure;
  for (std::uint64_t start = 0; start < total; start += chunk) {
    const std::uint64_t end = std::min(total, start + chunk);
    pts.resize(static_cast<Eigen::Index>(grid.dim()), static_cast<Eigen::Index>(end - start));
    for (std::uint64_t i = start; i < end; ++i) {
      grid.point(i, x);
      pts.col(static_cast<Eigen::Index>(i - start)) = x;
    }
    const auto a = before.logical_batch(pts);
    const auto b = after.logical_batch(pts);
    for (std::uint64_t i = start; i < end; ++i) {
      const auto k = static_cast<std::size_t>(i - start);
      const bool sign = net.evaluate(pts.col(static_cast<Eigen::Index>(k))) >= 0.0;
      if (a[k] == sign && b[k] != sign) {
        if (failures++ == 0) first_failure = "grid point " + std::to_string(i);
      }
    }
  }
  if (failures > 0) {
    result.tree = tree;
    result.leaves_after = result.leaves_before;
    result.diagnostic = "simplified circuit lost agreement with the network at " + std::to_string(failures) +
                        " grid points (first: " + first_failure + "); kept the original";
    return result;
  }
  result.leaves_after = candidate.leaf_count();
  result.tree = std::move(candidate);
  result.verified = true;
  return result;
}

}  // namespace relucirc
