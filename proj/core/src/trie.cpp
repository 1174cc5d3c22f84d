#include "relucirc/trie.hpp"

#include <algorithm>
#include <map>

#include "relucirc/error.hpp"

namespace relucirc {

StateTrie::StateTrie(const ArchSpec& arch, std::span<const NetworkState> states)
    : depth_(arch.depth()), arch_(arch) {
  const std::size_t d = arch.depth();
  nodes_.push_back(Node{d + 1, BitVector{}, {}, kNone});
  std::vector<std::map<BitVector, std::uint32_t>> lookup(1);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const NetworkState& s = states[i];
    if (s.bits.size() != arch.hidden_neuron_count()) throw InputError("state length does not match architecture");
    std::uint32_t cur = 0;
    for (std::size_t layer = d; layer >= 1; --layer) {
      BitVector label = s.layer(arch, layer);
      auto [it, inserted] = lookup[cur].try_emplace(label, static_cast<std::uint32_t>(nodes_.size()));
      if (inserted) {
        nodes_.push_back(Node{layer, std::move(label), {}, kNone});
        lookup.emplace_back();
      }
      cur = it->second;
    }
    if (nodes_[cur].state != kNone) throw InputError("duplicate state " + s.to_string());
    nodes_[cur].state = static_cast<std::uint32_t>(i);
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    for (const auto& [label, child] : lookup[id]) nodes_[id].children.push_back(child);
  }
}

std::vector<NetworkState> StateTrie::paths() const {
  std::vector<NetworkState> out;
  std::vector<BitVector> stack(depth_ + 1);
  auto walk = [&](auto&& self, std::uint32_t id, std::size_t k) -> void {
    const Node& n = nodes_[id];
    if (id != 0) stack[k] = n.label;
    if (id != 0 && n.layer == 1) {
      NetworkState s;
      for (std::size_t layer = 1; layer <= depth_; ++layer) s.bits.append(stack[depth_ - layer + 1]);
      out.push_back(std::move(s));
      return;
    }
    for (auto c : n.children) self(self, c, k + 1);
  };
  walk(walk, 0, 0);
  return out;
}

}  // namespace relucirc
