#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relucirc/mlp.hpp"

namespace relucirc {

/// Trie over network states read from the last hidden layer down to the
/// first. A node at depth k (root = 0) stands for one suffix
/// (sigma^{d-k+1}, ..., sigma^d) occurring in the source set; its children
/// are the distinct sigma^{d-k} completing that suffix, in ascending order.
/// Depth-d nodes are complete states and carry their index in the source list.
class StateTrie {
 public:
  static constexpr std::uint32_t kNone = 0xffffffffu;

  struct Node {
    std::size_t layer = 0;  // layer of `label`; d+1 for the root
    BitVector label;
    std::vector<std::uint32_t> children;
    std::uint32_t state = kNone;
  };

  StateTrie(const ArchSpec& arch, std::span<const NetworkState> states);

  const Node& root() const { return nodes_[0]; }
  const Node& node(std::uint32_t id) const { return nodes_[id]; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t depth() const noexcept { return depth_; }

  /// Every root-to-leaf path, reassembled into a state, in trie order.
  std::vector<NetworkState> paths() const;

 private:
  std::vector<Node> nodes_;
  std::size_t depth_ = 0;
  ArchSpec arch_;
};

}  // namespace relucirc
