#include "relucirc/circuit_eval.hpp"

#include <algorithm>
#include <limits>

#include "relucirc/error.hpp"

namespace relucirc {

TreeEvaluator::TreeEvaluator(const CircuitTree& tree) : tree_(&tree) {
  for (std::uint32_t id = 0; id < tree.node_count(); ++id) {
    const CircuitNode& n = tree.node(id);
    if (n.label == CircuitTree::kNoLabel || n.layer < 1) continue;
    const auto layer = static_cast<std::size_t>(n.layer);
    const BitVector& bits = tree.label(n.label);
    if (layer >= label_ids_.size()) {
      label_ids_.resize(layer + 1);
      layer_width_.resize(layer + 1, 0);
    }
    label_ids_[layer].try_emplace(bits, n.label);
    layer_width_[layer] = bits.size();
  }
  depth_ = label_ids_.empty() ? 0 : label_ids_.size() - 1;
  hint_.assign(depth_ + 2, CircuitTree::kNoLabel);
  block_points_.resize(tree.input_dim() * 64);
  block_values_.resize(64);
}

void TreeEvaluator::set_hint(const NetworkState* hint) {
  std::fill(hint_.begin(), hint_.end(), CircuitTree::kNoLabel);
  if (hint == nullptr || depth_ == 0) return;
  std::size_t total = 0;
  for (std::size_t l = 1; l <= depth_; ++l) {
    if (layer_width_[l] == 0) return;
    total += layer_width_[l];
  }
  if (total != hint->bits.size()) return;
  std::size_t off = 0;
  for (std::size_t l = 1; l <= depth_; ++l) {
    const BitVector bits = hint->bits.slice(off, layer_width_[l]);
    off += layer_width_[l];
    auto it = label_ids_[l].find(bits);
    if (it != label_ids_[l].end()) hint_[l] = it->second;
  }
}

namespace {

// Index of the child whose label matches the hint for its layer, or count.
std::uint32_t hinted_child(const CircuitTree& t, std::span<const std::uint32_t> kids,
                           const std::vector<std::uint32_t>& hint) {
  if (kids.empty()) return 0;
  const CircuitNode& first = t.node(kids[0]);
  if (first.layer < 1 || static_cast<std::size_t>(first.layer) >= hint.size()) return static_cast<std::uint32_t>(kids.size());
  const std::uint32_t want = hint[static_cast<std::size_t>(first.layer)];
  if (want == CircuitTree::kNoLabel) return static_cast<std::uint32_t>(kids.size());
  for (std::uint32_t i = 0; i < kids.size(); ++i) {
    if (t.node(kids[i]).label == want) return i;
  }
  return static_cast<std::uint32_t>(kids.size());
}

}  // namespace

double TreeEvaluator::alphabeta(std::uint32_t id, double alpha, double beta) {
  const CircuitTree& t = *tree_;
  const CircuitNode& n = t.node(id);
  if (n.kind == NodeKind::kLeaf) {
    ++leaf_evals_;
    return t.atom_value(n.first, x_);
  }
  const auto kids = t.children(id);
  const std::uint32_t h = hinted_child(t, kids, hint_);
  const bool maximize = is_join_max(n.kind);
  double v = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  auto visit = [&](std::uint32_t c) {
    const double r = alphabeta(c, alpha, beta);
    if (maximize) {
      v = std::max(v, r);
      alpha = std::max(alpha, v);
    } else {
      v = std::min(v, r);
      beta = std::min(beta, v);
    }
    return alpha >= beta;
  };
  if (h < kids.size() && visit(kids[h])) return v;
  for (std::uint32_t i = 0; i < kids.size(); ++i) {
    if (i == h) continue;
    if (visit(kids[i])) break;
  }
  return v;
}

double TreeEvaluator::numeric(std::uint32_t node, const Eigen::Ref<const Vector>& x, const NetworkState* hint) {
  if (static_cast<std::size_t>(x.size()) != tree_->input_dim()) throw InputError("input dimension does not match circuit");
  xbuf_ = x;
  x_ = xbuf_.data();
  set_hint(hint);
  return alphabeta(node, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
}

double TreeEvaluator::numeric(const Eigen::Ref<const Vector>& x, const NetworkState* hint) {
  return numeric(tree_->root(), x, hint);
}

double TreeEvaluator::numeric_exhaustive(std::uint32_t id, const Eigen::Ref<const Vector>& x) const {
  const CircuitTree& t = *tree_;
  const CircuitNode& n = t.node(id);
  if (n.kind == NodeKind::kLeaf) {
    const Vector xv = x;
    return t.atom_value(n.first, xv.data());
  }
  const bool maximize = is_join_max(n.kind);
  double v = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (auto c : t.children(id)) {
    const double r = numeric_exhaustive(c, x);
    v = maximize ? std::max(v, r) : std::min(v, r);
  }
  return v;
}

bool TreeEvaluator::short_circuit(std::uint32_t id) {
  const CircuitTree& t = *tree_;
  const CircuitNode& n = t.node(id);
  if (n.kind == NodeKind::kLeaf) {
    ++leaf_evals_;
    return t.atom_value(n.first, x_) >= 0.0;
  }
  const auto kids = t.children(id);
  const std::uint32_t h = hinted_child(t, kids, hint_);
  const bool any = is_join_max(n.kind);
  if (h < kids.size() && short_circuit(kids[h]) == any) return any;
  for (std::uint32_t i = 0; i < kids.size(); ++i) {
    if (i == h) continue;
    if (short_circuit(kids[i]) == any) return any;
  }
  return !any;
}

bool TreeEvaluator::logical(std::uint32_t node, const Eigen::Ref<const Vector>& x, const NetworkState* hint) {
  if (static_cast<std::size_t>(x.size()) != tree_->input_dim()) throw InputError("input dimension does not match circuit");
  xbuf_ = x;
  x_ = xbuf_.data();
  set_hint(hint);
  return short_circuit(node);
}

bool TreeEvaluator::logical(const Eigen::Ref<const Vector>& x, const NetworkState* hint) {
  return logical(tree_->root(), x, hint);
}

std::uint64_t TreeEvaluator::block(std::uint32_t id, std::uint64_t active) {
  const CircuitTree& t = *tree_;
  const CircuitNode& n = t.node(id);
  if (n.kind == NodeKind::kLeaf) {
    std::uint64_t out = 0;
    const std::size_t dim = t.input_dim();
    for (std::uint64_t m = active; m != 0; m &= m - 1) {
      const int i = __builtin_ctzll(m);
      ++leaf_evals_;
      if (t.atom_value(n.first, block_points_.data() + static_cast<std::size_t>(i) * dim) >= 0.0) {
        out |= std::uint64_t{1} << i;
      }
    }
    return out;
  }
  if (is_join_max(n.kind)) {
    std::uint64_t acc = 0;
    for (auto c : t.children(id)) {
      const std::uint64_t rest = active & ~acc;
      if (rest == 0) break;
      acc |= block(c, rest);
    }
    return acc & active;
  }
  std::uint64_t acc = active;
  for (auto c : t.children(id)) {
    if (acc == 0) break;
    acc &= block(c, acc);
  }
  return acc;
}

std::vector<std::uint64_t> TreeEvaluator::truth_bits(std::uint32_t node, const Matrix& points) {
  const std::size_t dim = tree_->input_dim();
  if (static_cast<std::size_t>(points.rows()) != dim) throw InputError("point dimension does not match circuit");
  const auto m = static_cast<std::size_t>(points.cols());
  std::vector<std::uint64_t> out((m + 63) / 64, 0);
  for (std::size_t w = 0; w < out.size(); ++w) {
    const std::size_t base = w * 64;
    const std::size_t count = std::min<std::size_t>(64, m - base);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        block_points_[i * dim + j] = points(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(base + i));
      }
    }
    const std::uint64_t active = count == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << count) - 1);
    out[w] = block(node, active);
  }
  return out;
}

std::vector<std::uint8_t> TreeEvaluator::logical_batch(std::uint32_t node, const Matrix& points) {
  const auto bits = truth_bits(node, points);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(points.cols()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (bits[i >> 6] >> (i & 63)) & 1u;
  return out;
}

std::vector<std::uint8_t> TreeEvaluator::logical_batch(const Matrix& points) {
  return logical_batch(tree_->root(), points);
}

double eval_numeric(const CircuitTree& tree, const Eigen::Ref<const Vector>& x) {
  TreeEvaluator ev(tree);
  return ev.numeric(x);
}

bool eval_logical(const CircuitTree& tree, const Eigen::Ref<const Vector>& x) {
  TreeEvaluator ev(tree);
  return ev.logical(x);
}

}  // namespace relucirc
