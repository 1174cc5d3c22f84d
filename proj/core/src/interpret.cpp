#include "relucirc/interpret.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "relucirc/circuit_eval.hpp"
#include "relucirc/error.hpp"
#include "relucirc/log.hpp"

namespace relucirc {

void BottleneckArch::validate() const {
  if (bottleneck_width < 2 || bottleneck_width > 6) throw InputError("bottleneck width must lie in [2,6]");
  mlp_arch().validate();
}

ArchSpec BottleneckArch::mlp_arch() const {
  ArchSpec a = base;
  a.input_dim = bottleneck_width;
  return a;
}

Dataset to_circuit_coordinates(const Model& model, const Dataset& data) {
  if (data.dim() != model.input_dim()) throw InputError("dataset dimension does not match the model input");
  if (!model.bottleneck) return data;
  Dataset out = data;
  out.points = (model.bottleneck->weight * data.points).colwise() + model.bottleneck->bias;
  return out;
}

double ProbeArray::true_fraction(std::size_t digit) const {
  return count[digit] == 0 ? 0.0 : static_cast<double>(true_count[digit]) / static_cast<double>(count[digit]);
}

double ProbeArray::false_fraction(std::size_t digit) const {
  return count[digit] == 0 ? 0.0 : 1.0 - true_fraction(digit);
}

ProbeArray probe_node(const CircuitTree& tree, const NodePath& path, const Dataset& data, const std::string& split) {
  if (!data.has_digits()) throw InputError("probing needs per-sample digit metadata");
  if (data.dim() != tree.input_dim()) throw InputError("dataset dimension does not match the circuit input");
  const std::uint32_t node = node_at(tree, path);
  TreeEvaluator eval(tree);
  const std::vector<std::uint8_t> out = eval.logical_batch(node, data.points);
  ProbeArray p;
  p.node = to_string(path);
  p.split = split;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int d = data.digits[i];
    if (d < 0 || d > 9) throw InputError("digit metadata out of range");
    ++p.count[static_cast<std::size_t>(d)];
    if (out[i]) ++p.true_count[static_cast<std::size_t>(d)];
  }
  return p;
}

NodePath first_branch(const CircuitTree& tree) {
  NodePath path;
  std::uint32_t node = tree.root();
  while (tree.node(node).kind != NodeKind::kLeaf && tree.children(node).size() == 1) {
    path.push_back(0);
    node = tree.children(node)[0];
  }
  return path;
}

std::vector<NodePath> top_level_paths(const CircuitTree& tree) {
  const NodePath top = first_branch(tree);
  const std::uint32_t node = node_at(tree, top);
  if (tree.node(node).kind == NodeKind::kLeaf) return {NodePath{}};
  std::vector<NodePath> out;
  for (std::size_t i = 0; i < tree.children(node).size(); ++i) {
    out.push_back(top);
    out.back().push_back(i);
  }
  return out;
}

std::vector<NodePath> splice_candidates(const CircuitTree& tree, const std::vector<MemorizationFlag>& flags) {
  const NodePath top = first_branch(tree);
  std::vector<NodePath> out;
  for (const auto& f : flags) {
    if (f.path.size() <= top.size() || !std::equal(top.begin(), top.end(), f.path.begin())) continue;
    if (std::find(out.begin(), out.end(), f.path) == out.end()) out.push_back(f.path);
  }
  return out.empty() ? top_level_paths(tree) : out;
}

std::vector<NodePath> paths_to_depth(const CircuitTree& tree, std::size_t max_depth, const NodePath& from) {
  std::vector<NodePath> out;
  NodePath cur = from;
  const std::size_t limit = from.size() + max_depth;
  auto walk = [&](auto&& self, std::uint32_t node) -> void {
    out.push_back(cur);
    if (cur.size() == limit) return;
    const auto kids = tree.children(node);
    if (tree.node(node).kind == NodeKind::kLeaf) return;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      cur.push_back(i);
      self(self, kids[i]);
      cur.pop_back();
    }
  };
  walk(walk, node_at(tree, from));
  return out;
}

void write_probe_csv(const std::vector<ProbeArray>& probes, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << "node,digit,split,true_frac,count\n";
  char buf[64];
  for (const auto& p : probes) {
    for (std::size_t d = 0; d < 10; ++d) {
      std::snprintf(buf, sizeof buf, "%.6f", p.true_fraction(d));
      f << p.node << ',' << d << ',' << p.split << ',' << buf << ',' << p.count[d] << '\n';
    }
  }
}

std::vector<MemorizationFlag> diagnose_memorization(const CircuitTree& tree, const Dataset& train,
                                                    const Dataset& test, double threshold, std::size_t max_depth) {
  std::vector<MemorizationFlag> flags;
  for (const NodePath& path : paths_to_depth(tree, max_depth, first_branch(tree))) {
    const ProbeArray a = probe_node(tree, path, train, "train");
    const ProbeArray b = probe_node(tree, path, test, "test");
    for (std::size_t d = 0; d < 10; ++d) {
      if (a.count[d] == 0 || b.count[d] == 0) continue;
      MemorizationFlag f{path, d, a.true_fraction(d), b.true_fraction(d)};
      if (f.gap() >= threshold) flags.push_back(std::move(f));
    }
  }
  std::stable_sort(flags.begin(), flags.end(),
                   [](const MemorizationFlag& x, const MemorizationFlag& y) { return x.gap() > y.gap(); });
  return flags;
}

double circuit_accuracy(const CircuitTree& tree, const Dataset& data) {
  if (data.size() == 0) throw InputError("accuracy of an empty dataset");
  TreeEvaluator eval(tree);
  const std::vector<std::uint8_t> out = eval.logical_batch(data.points);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) hits += out[i] == data.labels[i];
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

StateRegistry enumerate_model_states(const MlpParams& params, const Dataset& data, const CircuitBuildConfig& cfg,
                                     GridSpec* grid_out) {
  const GridSpec grid = grid_around(data.points, cfg.grid_resolution, cfg.grid_expand);
  StateRegistry reg = enumerate_states(params, grid);
  Evaluator eval(params);
  NetworkState state;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double out = eval.evaluate(data.point(i), &state);
    reg.add(state, out, data.point(i));
  }
  if (cfg.refine) reg = refine_boundary(params, reg, grid);
  if (grid_out) *grid_out = grid;
  return reg;
}

ProstheticReport prosthetic_workflow(const Model& host, const CircuitTree& host_tree,
                                     const std::vector<NodePath>& candidates, const Dataset& prosthetic_train,
                                     const Dataset& host_train, const Dataset& validation, const Dataset& test,
                                     const ProstheticConfig& cfg) {
  if (!host.bottleneck) throw InputError("prosthetic workflow needs a host with a bottleneck layer");
  if (candidates.empty()) throw InputError("no candidate node to replace");
  const Dataset pz = to_circuit_coordinates(host, prosthetic_train);
  const Dataset trz = to_circuit_coordinates(host, host_train);
  const Dataset vz = to_circuit_coordinates(host, validation);
  const Dataset tz = to_circuit_coordinates(host, test);

  ArchSpec arch = cfg.base;
  arch.input_dim = host.mlp.arch.input_dim;
  const TrainRun run = train(pz, arch, cfg.train);
  ProstheticReport rep;
  rep.prosthetic = Model{host.bottleneck, run.final.mlp};
  rep.prosthetic_train_accuracy = accuracy(run.final.mlp, pz);
  if (rep.prosthetic_train_accuracy < cfg.min_train_accuracy) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "prosthetic reached train accuracy %.4f, below the required %.4f",
                  rep.prosthetic_train_accuracy, cfg.min_train_accuracy);
    throw TrainingError(buf);
  }
  const StateRegistry reg = enumerate_model_states(run.final.mlp, trz, cfg.circuit);
  rep.prosthetic_tree = build_logical_tree(run.final.mlp, reg, cfg.circuit.build);

  double best = -1.0;
  for (const NodePath& path : candidates) {
    CircuitTree t = splice(host_tree, path, rep.prosthetic_tree);
    const double acc = circuit_accuracy(t, vz);
    rep.candidates.push_back({path, acc});
    if (acc > best) {
      best = acc;
      rep.path = path;
      rep.tree = std::move(t);
    }
  }
  rep.train_before = circuit_accuracy(host_tree, trz);
  rep.test_before = circuit_accuracy(host_tree, tz);
  rep.train_after = circuit_accuracy(rep.tree, trz);
  rep.test_after = circuit_accuracy(rep.tree, tz);
  log_info("prosthetic spliced at " + to_string(rep.path));
  return rep;
}

}  // namespace relucirc
