#pragma once

#include <filesystem>
#include <string>

#include "relucirc/circuit.hpp"

namespace relucirc {

/// Circuit file layout (JSON):
///
///   { "format": "relucirc-circuit", "version": 1, "mode": "logical",
///     "input_dim": 2, "root": 0,
///     "nodes": [ { "id": 0, "kind": "or", "layer": 4, "children": [1, 7] },
///                { "id": 1, "kind": "and", "layer": 3, "label": "011010", "children": [...] },
///                { "id": 5, "kind": "leaf", "layer": 1, "label": "110000", "atom_id": 0 }, ... ],
///     "atoms": [ { "id": 0, "coefficients": ["0x1.2p-1", "-0x1p+0"], "constant": "0x0p+0" }, ... ],
///     "states": ["010110...", ...] }
///
/// Node ids are preorder positions. Reals are hex floats, so atoms survive a
/// round trip exactly.
std::string circuit_to_json(const CircuitTree& tree);
CircuitTree circuit_from_json(const std::string& text);

void save_circuit(const CircuitTree& tree, const std::filesystem::path& path);
CircuitTree load_circuit(const std::filesystem::path& path);

}  // namespace relucirc
