#include <benchmark/benchmark.h>

#include "relucirc/circuit.hpp"
#include "relucirc/circuit_eval.hpp"
#include "relucirc/grid.hpp"
#include "relucirc/operand.hpp"
#include "relucirc/registry.hpp"
#include "relucirc/synthetic.hpp"
#include "relucirc/trainer.hpp"

using namespace relucirc;

namespace {

struct Setup {
  Dataset data;
  MlpParams params;
  StateRegistry registry;
  GridSpec grid;
};

// A DataII network on ArchII, trained once and shared by every benchmark.
const Setup& setup() {
  static const Setup s = [] {
    Setup out;
    out.data = gen_synthetic({Tier::kDataII, 100, 0.15, 1});
    TrainConfig cfg;
    cfg.steps = 3000;
    cfg.learning_rate = 0.003;
    cfg.seed = 1;
    cfg.snapshot_every = 0;
    out.params = train(out.data, ArchSpec{2, {6, 6, 6, 6, 6, 6}}, cfg).final.mlp;
    out.grid = grid_around(out.data, 256, 0.25);
    out.registry = refine_boundary(out.params, enumerate_states(out.params, out.grid, {100'000'000, 1}), out.grid,
                                   {100'000'000, 1});
    return out;
  }();
  return s;
}

void BM_EnumerateStates(benchmark::State& state) {
  const Setup& s = setup();
  const GridSpec grid = grid_around(s.data, static_cast<std::size_t>(state.range(0)), 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_states(s.params, grid, {100'000'000, 1}).size());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * grid.total_points()));
}
BENCHMARK(BM_EnumerateStates)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_AllPairAtoms(benchmark::State& state) {
  const Setup& s = setup();
  const auto states = s.registry.sigma_bar();
  for (auto _ : state) benchmark::DoNotOptimize(all_pair_atoms(s.params, states).size());
  state.counters["states"] = static_cast<double>(states.size());
}
BENCHMARK(BM_AllPairAtoms)->Unit(benchmark::kMillisecond);

void BM_BuildTree(benchmark::State& state) {
  const Setup& s = setup();
  const bool numeric = state.range(0) == 0;
  for (auto _ : state) {
    const CircuitTree t = numeric ? build_numeric_tree(s.params, s.registry) : build_logical_tree(s.params, s.registry);
    benchmark::DoNotOptimize(t.node_count());
  }
  state.SetLabel(numeric ? "numeric" : "logical");
}
BENCHMARK(BM_BuildTree)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EvalNumeric(benchmark::State& state) {
  const Setup& s = setup();
  const CircuitTree tree = build_numeric_tree(s.params, s.registry);
  TreeEvaluator ev(tree);
  const bool hinted = state.range(0) == 1;
  std::vector<NetworkState> hints(s.data.size());
  for (std::size_t i = 0; i < s.data.size(); ++i) hints[i] = forward(s.params, s.data.point(i)).state;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ev.numeric(s.data.point(i), hinted ? &hints[i] : nullptr));
    i = (i + 1) % s.data.size();
  }
  state.SetLabel(hinted ? "state hint" : "no hint");
}
BENCHMARK(BM_EvalNumeric)->Arg(0)->Arg(1);

void BM_EvalLogicalBatch(benchmark::State& state) {
  const Setup& s = setup();
  const CircuitTree tree = build_logical_tree(s.params, s.registry);
  TreeEvaluator ev(tree);
  for (auto _ : state) benchmark::DoNotOptimize(ev.logical_batch(s.data.points).size());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * s.data.size()));
}
BENCHMARK(BM_EvalLogicalBatch);

void BM_Network(benchmark::State& state) {
  const Setup& s = setup();
  Evaluator ev(s.params);
  NetworkState st;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ev.evaluate(s.data.point(i), &st));
    i = (i + 1) % s.data.size();
  }
}
BENCHMARK(BM_Network);

}  // namespace

BENCHMARK_MAIN();
