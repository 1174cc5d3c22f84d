#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "relucirc/circuit.hpp"
#include "relucirc/grid.hpp"
#include "relucirc/registry.hpp"

namespace relucirc {

struct VerifyOptions {
  double numeric_tolerance = 1e-6;   // on |N - tree| / max(1, |N|)
  double fine_min_agreement = 0.999;
  double boundary_epsilon = 1e-9;    // |preactivation| below this counts as on an NSB
  std::size_t max_logged = 100;
  std::size_t threads = 0;
};

struct Disagreement {
  Vector x;
  NetworkState state;
  double network = 0.0;
  double circuit = 0.0;        // tree value (numeric) or 1/0 (logical)
  bool state_enumerated = false;
  double min_abs_preactivation = 0.0;
  bool fine_grid = false;
  /// True if the state was never enumerated or x sits on a neuron boundary.
  bool attributable() const;
};

/// Result of comparing a circuit with its network over a grid.
struct EquivalenceReport {
  CircuitMode mode = CircuitMode::kNumeric;
  std::uint64_t points = 0;
  std::uint64_t guaranteed_points = 0;      // numeric: points whose state is in the tree's index set
  double max_abs_diff_guaranteed = 0.0;
  double max_scaled_diff_guaranteed = 0.0;  // |diff| / max(1, |N|)
  double max_abs_diff_all = 0.0;
  std::uint64_t agreeing_points = 0;        // logical, enumeration grid
  double agreement = 1.0;
  std::uint64_t fine_points = 0;
  std::uint64_t fine_agreeing_points = 0;
  double fine_agreement = 1.0;
  std::uint64_t unattributable = 0;
  std::vector<Disagreement> disagreements;  // at most VerifyOptions::max_logged
  bool pass = false;
  std::string summary;

  std::string to_json() const;
};

/// Numeric tree vs N(x) at every grid point. The pass criterion uses only
/// points whose state is one of the tree's index states.
EquivalenceReport verify_numeric(const MlpParams& params, const CircuitTree& tree, const GridSpec& grid,
                                 const VerifyOptions& options = {});

/// Logical tree vs [N(x) >= 0] on the grid (must agree everywhere) and on
/// the grid refined by `fine_factor` (must reach fine_min_agreement, and
/// every miss must be attributable to a state absent from `registry` or to
/// a point on a neuron boundary).
EquivalenceReport verify_logical(const MlpParams& params, const CircuitTree& tree, const StateRegistry& registry,
                                 const GridSpec& grid, std::size_t fine_factor = 2,
                                 const VerifyOptions& options = {});

void write_report(const EquivalenceReport& report, const std::filesystem::path& path);

}  // namespace relucirc
