#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relucirc/operand.hpp"

namespace relucirc {

struct PropertyResult {
  std::string name;
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;
  std::vector<std::string> counterexamples;  // first few, human readable
  double seconds = 0.0;

  bool passed() const noexcept { return failures == 0; }
};

struct PropertyReport {
  std::vector<PropertyResult> results;

  bool passed() const;
  const PropertyResult* find(const std::string& name) const;
  std::string to_json() const;
};

struct PropertySuiteOptions {
  std::uint64_t seed = 1;
  std::size_t trials = 1000;           // random tables for the min-max/Boolean check
  std::size_t networks = 20;           // random networks for the operand checks
  std::size_t inputs_per_network = 50;
  std::size_t max_depth = 4;
  std::size_t max_width = 8;
  std::size_t max_table_side = 8;
  double tolerance = 1e-9;             // relative, for operand identities
  double tree_tolerance = 1e-6;        // for tree/flat agreement
  /// Atom constructor under test; swap in a faulty one to check the suite bites.
  OperandFn operand = net_operand_atom;
};

/// Property names reported by run_property_suite.
inline constexpr const char* kPropMinMaxBoolean = "minmax-boolean-equivalence";
inline constexpr const char* kPropSaddle = "saddle-identity";
inline constexpr const char* kPropLemma = "fundamental-lemma";
inline constexpr const char* kPropFlatTree = "flat-hierarchical-agreement";
inline constexpr const char* kPropSigmaPm = "sigma-pm-sign";

/// Checks, on random instances:
///  - [max_a min_b f >= 0] <=> OR_a AND_b [f >= 0] for random finite tables;
///  - F(s(x), s(x), x) = N(x);
///  - min_t F(m, t, x) <= F(m, s(x), x) <= N(x) <= F(s(x), t, x) <= max_m F(m, t, x)
///    together with min_t F(s(x), t, x) = N(x) = max_m F(m, s(x), x);
///  - flat max-min, flat min-max and the trie tree agree with N(x);
///  - [N(x) >= 0] <=> [max over nonneg-output states, min over negative-output
///    states of F >= 0] on a grid.
/// With trials == 0 and networks == 0 the report is empty and passes.
PropertyReport run_property_suite(const PropertySuiteOptions& options = {});

}  // namespace relucirc
