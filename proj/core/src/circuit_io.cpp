#include "relucirc/circuit_io.hpp"

#include <fstream>
#include <unordered_map>

#include "json_util.hpp"

namespace relucirc {

using detail::json;

namespace {

json to_json(const CircuitTree& tree) {
  tree.validate();
  json nodes = json::array();
  // Preorder renumbering so ids in the file are dense and parents precede children.
  std::vector<std::uint32_t> order;
  std::unordered_map<std::uint32_t, std::uint32_t> id_of;
  std::vector<std::uint32_t> stack{tree.root()};
  while (!stack.empty()) {
    const std::uint32_t n = stack.back();
    stack.pop_back();
    id_of[n] = static_cast<std::uint32_t>(order.size());
    order.push_back(n);
    const auto kids = tree.children(n);
    for (std::size_t i = kids.size(); i-- > 0;) stack.push_back(kids[i]);
  }
  for (const std::uint32_t n : order) {
    const CircuitNode& node = tree.node(n);
    json j{{"id", id_of[n]}, {"kind", to_string(node.kind)}, {"layer", node.layer}};
    if (node.label != CircuitTree::kNoLabel) j["label"] = tree.label(node.label).to_string();
    if (node.kind == NodeKind::kLeaf) {
      j["atom_id"] = node.first;
    } else {
      json kids = json::array();
      for (auto c : tree.children(n)) kids.push_back(id_of[c]);
      j["children"] = std::move(kids);
    }
    nodes.push_back(std::move(j));
  }
  json atoms = json::array();
  for (std::uint32_t a = 0; a < tree.atom_count(); ++a) {
    const auto v = tree.atom(a);
    json coeffs = json::array();
    for (std::size_t k = 0; k + 1 < v.size(); ++k) coeffs.push_back(detail::hex_double(v[k]));
    atoms.push_back({{"id", a}, {"coefficients", std::move(coeffs)}, {"constant", detail::hex_double(v.back())}});
  }
  json states = json::array();
  for (const auto& s : tree.index_states()) states.push_back(s.to_string());
  return json{{"format", "relucirc-circuit"}, {"version", 1},         {"mode", to_string(tree.mode())},
              {"input_dim", tree.input_dim()}, {"root", 0},            {"nodes", std::move(nodes)},
              {"atoms", std::move(atoms)},     {"states", std::move(states)}};
}

CircuitTree from_json(const json& j) {
  try {
    if (j.value("format", std::string{}) != "relucirc-circuit") throw FormatError("not a relucirc circuit file");
    const auto dim = j.at("input_dim").get<std::size_t>();
    CircuitTree tree(parse_mode(j.at("mode").get<std::string>()), dim);

    std::vector<double> atom_data;
    const json& atoms = j.at("atoms");
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const json& at = atoms[a];
      if (at.at("id").get<std::size_t>() != a) throw FormatError("atom ids must be 0..n-1 in order");
      const json& coeffs = at.at("coefficients");
      if (coeffs.size() != dim) throw FormatError("atom has wrong number of coefficients");
      for (const auto& c : coeffs) atom_data.push_back(detail::parse_hex_double(c));
      atom_data.push_back(detail::parse_hex_double(at.at("constant")));
    }
    tree.set_atoms(std::move(atom_data));

    const json& nodes = j.at("nodes");
    // Nodes are created in file order so file ids equal in-memory ids.
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const json& n = nodes[i];
      if (n.at("id").get<std::size_t>() != i) throw FormatError("node ids must be 0..n-1 in order");
      const NodeKind kind = parse_kind(n.at("kind").get<std::string>());
      const std::uint32_t label =
          n.contains("label") ? tree.intern_label(BitVector::from_string(n["label"].get<std::string>())) : CircuitTree::kNoLabel;
      const auto count = kind == NodeKind::kLeaf ? 0u : static_cast<std::uint32_t>(n.at("children").size());
      const std::uint32_t id = tree.add_node(kind, n.value("layer", 0), label, count);
      if (kind == NodeKind::kLeaf) {
        tree.set_leaf_atom(id, n.at("atom_id").get<std::uint32_t>());
      } else {
        for (std::uint32_t k = 0; k < count; ++k) tree.set_child(id, k, n["children"][k].get<std::uint32_t>());
      }
    }
    tree.set_root(j.at("root").get<std::uint32_t>());
    if (j.contains("states")) {
      std::vector<NetworkState> states;
      for (const auto& s : j["states"]) states.push_back(NetworkState{BitVector::from_string(s.get<std::string>())});
      tree.set_index_states(std::move(states));
    }
    try {
      tree.validate();
    } catch (const InputError& e) {
      throw FormatError(std::string("circuit file: ") + e.what());
    }
    return tree;
  } catch (const json::exception& e) {
    throw FormatError(std::string("circuit file: ") + e.what());
  } catch (const InputError& e) {
    throw FormatError(std::string("circuit file: ") + e.what());
  }
}

}  // namespace

std::string circuit_to_json(const CircuitTree& tree) { return to_json(tree).dump(1); }

CircuitTree circuit_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("circuit file: ") + e.what());
  }
  return from_json(j);
}

void save_circuit(const CircuitTree& tree, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << to_json(tree).dump() << '\n';
}

CircuitTree load_circuit(const std::filesystem::path& path) { return from_json(detail::read_json_file(path)); }

}  // namespace relucirc
