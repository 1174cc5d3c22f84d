#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "relucirc/circuit.hpp"
#include "relucirc/circuit_edit.hpp"
#include "relucirc/dataset.hpp"
#include "relucirc/registry.hpp"
#include "relucirc/trainer.hpp"

namespace relucirc {

/// A linear (no ReLU) layer from the pixels down to `bottleneck_width`
/// followed by `base` on the bottleneck coordinates.
struct BottleneckArch {
  ArchSpec base;
  std::size_t bottleneck_width = 4;

  void validate() const;  // width in [2,6], base valid
  ArchSpec mlp_arch() const;
};

/// Dataset mapped into the model's circuit coordinates (identity without a
/// bottleneck). Labels and digits are carried over.
Dataset to_circuit_coordinates(const Model& model, const Dataset& data);

/// True/False tallies of one circuit node per digit on one split.
struct ProbeArray {
  std::string node;
  std::string split;
  std::array<std::size_t, 10> count{};
  std::array<std::size_t, 10> true_count{};

  /// 0 for digits with no samples.
  double true_fraction(std::size_t digit) const;
  double false_fraction(std::size_t digit) const;
};

/// Evaluates the subcircuit at `path` on every sample (data already in
/// circuit coordinates). Throws InputError without digit metadata.
ProbeArray probe_node(const CircuitTree& tree, const NodePath& path, const Dataset& data,
                      const std::string& split = "train");

/// `from` and every path below it down to `max_depth` further levels, preorder.
std::vector<NodePath> paths_to_depth(const CircuitTree& tree, std::size_t max_depth, const NodePath& from = {});

/// CSV `node,digit,split,true_frac,count`.
void write_probe_csv(const std::vector<ProbeArray>& probes, const std::filesystem::path& path);

struct MemorizationFlag {
  NodePath path;
  std::size_t digit = 0;
  double train_fraction = 0.0;
  double test_fraction = 0.0;
  double gap() const { return train_fraction > test_fraction ? train_fraction - test_fraction
                                                             : test_fraction - train_fraction; }
};

/// Nodes from first_branch() down to `max_depth` levels below it and digits
/// whose True fraction differs between the splits by at least `threshold`,
/// largest gap first.
std::vector<MemorizationFlag> diagnose_memorization(const CircuitTree& tree, const Dataset& train,
                                                    const Dataset& test, double threshold = 0.25,
                                                    std::size_t max_depth = 2);

/// Path of the first node below the root (inclusive) with more than one
/// child; every node above it computes the same function as the root.
NodePath first_branch(const CircuitTree& tree);

/// Children of first_branch(), the readout used for probe figures. A tree
/// without any branching yields the root alone.
std::vector<NodePath> top_level_paths(const CircuitTree& tree);

/// Distinct flagged paths strictly below first_branch(), in flag order;
/// top_level_paths() when there are none.
std::vector<NodePath> splice_candidates(const CircuitTree& tree, const std::vector<MemorizationFlag>& flags);

/// Fraction of samples whose label the circuit reproduces (data in circuit coordinates).
double circuit_accuracy(const CircuitTree& tree, const Dataset& data);

struct CircuitBuildConfig {
  std::size_t grid_resolution = 16;
  double grid_expand = 0.1;
  bool refine = true;
  BuildOptions build;
};

/// States on a grid around the data plus the states of the data points
/// themselves, boundary-refined; all in circuit coordinates.
StateRegistry enumerate_model_states(const MlpParams& params, const Dataset& data,
                                     const CircuitBuildConfig& cfg, GridSpec* grid_out = nullptr);

struct ProstheticConfig {
  TrainConfig train;
  ArchSpec base;  // input_dim is replaced by the bottleneck width
  double min_train_accuracy = 0.9;
  CircuitBuildConfig circuit;
};

struct SpliceOutcome {
  NodePath path;
  double validation_accuracy = 0.0;
};

struct ProstheticReport {
  CircuitTree tree;            // host circuit with the prosthetic spliced in
  CircuitTree prosthetic_tree;
  Model prosthetic;            // shares the host bottleneck
  NodePath path;
  double prosthetic_train_accuracy = 0.0;
  double train_before = 0.0, train_after = 0.0;
  double test_before = 0.0, test_after = 0.0;
  std::vector<SpliceOutcome> candidates;
};

/// Trains a prosthetic network on the host's frozen bottleneck, extracts its
/// logical circuit and splices it at the candidate path that scores best on
/// `validation`. All datasets hold raw inputs. Throws TrainingError when the
/// prosthetic does not reach cfg.min_train_accuracy.
ProstheticReport prosthetic_workflow(const Model& host, const CircuitTree& host_tree,
                                     const std::vector<NodePath>& candidates, const Dataset& prosthetic_train,
                                     const Dataset& host_train, const Dataset& validation, const Dataset& test,
                                     const ProstheticConfig& cfg);

}  // namespace relucirc
