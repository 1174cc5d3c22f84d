#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "relucirc/circuit.hpp"
#include "relucirc/circuit_edit.hpp"
#include "relucirc/circuit_eval.hpp"
#include "relucirc/circuit_io.hpp"
#include "relucirc/error.hpp"
#include "relucirc/property_suite.hpp"
#include "relucirc/registry.hpp"

using namespace relucirc;
namespace fs = std::filesystem;

namespace {

std::vector<bool> to_bools(const NetworkState& s) {
  std::vector<bool> out;
  for (std::size_t i = 0; i < s.bits.size(); ++i) out.push_back(s.bits.get(i));
  return out;
}

// Two-level tree over a table of constants: join_max over rows of join_min over columns.
CircuitTree table_tree(const std::vector<std::vector<double>>& t, CircuitMode mode) {
  const NodeKind hi = mode == CircuitMode::kNumeric ? NodeKind::kMax : NodeKind::kOr;
  const NodeKind lo = mode == CircuitMode::kNumeric ? NodeKind::kMin : NodeKind::kAnd;
  CircuitTree tree(mode, 1);
  const auto root = tree.add_node(hi, 2, CircuitTree::kNoLabel, static_cast<std::uint32_t>(t.size()));
  for (std::size_t a = 0; a < t.size(); ++a) {
    const auto row = tree.add_node(lo, 1, CircuitTree::kNoLabel, static_cast<std::uint32_t>(t[a].size()));
    tree.set_child(root, static_cast<std::uint32_t>(a), row);
    for (std::size_t b = 0; b < t[a].size(); ++b) {
      const double coeffs[2] = {0.0, t[a][b]};
      const auto atom = tree.add_atom(coeffs);
      const auto leaf = tree.add_node(NodeKind::kLeaf, 0, CircuitTree::kNoLabel, 0);
      tree.set_leaf_atom(leaf, atom);
      tree.set_child(row, static_cast<std::uint32_t>(b), leaf);
    }
  }
  tree.set_root(root);
  tree.validate();
  return tree;
}

struct Fixture {
  MlpParams params;
  StateRegistry registry;
  GridSpec grid;
};

// Random network whose output changes sign on the grid.
Fixture random_fixture(std::mt19937_64& rng, std::size_t res = 33) {
  Fixture f;
  f.grid = GridSpec::uniform(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0), res);
  do {
    f.params = oracle::random_params(oracle::random_arch(rng, 2, 3, 4), rng);
    f.registry =
        refine_boundary(f.params, enumerate_states(f.params, f.grid, {100'000'000, 1}), f.grid, {100'000'000, 1});
  } while (f.registry.boundary_count() == 0);
  return f;
}

// Walks the tree collecting mu^l (min-node labels) and tau^l (labels of their
// children) and checks every leaf atom against the reference operand.
void check_leaves(const CircuitTree& tree, const MlpParams& p, std::uint32_t node, std::vector<BitVector> mu,
                  std::vector<BitVector> tau, const std::vector<Vector>& xs,
                  std::set<std::pair<std::string, std::string>>& pairs) {
  const std::size_t d = p.arch.depth();
  const CircuitNode& n = tree.node(node);
  if (is_join_max(n.kind) && n.kind != NodeKind::kLeaf) {
    for (auto c : tree.children(node)) check_leaves(tree, p, c, mu, tau, xs, pairs);
    return;
  }
  REQUIRE((n.kind == NodeKind::kMin || n.kind == NodeKind::kAnd));
  mu[static_cast<std::size_t>(n.layer) - 1] = tree.label(n.label);
  for (auto c : tree.children(node)) {
    const CircuitNode& cn = tree.node(c);
    CHECK(cn.layer == n.layer);
    auto t = tau;
    t[static_cast<std::size_t>(cn.layer) - 1] = tree.label(cn.label);
    if (cn.kind != NodeKind::kLeaf) {
      check_leaves(tree, p, c, mu, t, xs, pairs);
      continue;
    }
    BitVector m, tt;
    for (std::size_t l = 0; l < d; ++l) {
      m.append(mu[l]);
      tt.append(t[l]);
    }
    pairs.insert({m.to_string(), tt.to_string()});
    const auto mb = to_bools(NetworkState{m}), tb = to_bools(NetworkState{tt});
    for (const auto& x : xs) {
      const double ref = oracle::operand(p, mb, tb, x);
      CHECK(tree.atom_value(cn.first, x.data()) == doctest::Approx(ref).epsilon(1e-9).scale(1.0));
    }
  }
}

}  // namespace

TEST_SUITE("circuit") {

TEST_CASE("max-min sign equals the OR-AND of signs on random tables") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> side(1, 7);
  std::uniform_int_distribution<int> val(-3, 3);  // small integers so exact zeros occur
  const Vector x = Vector::Zero(1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::vector<double>> t(static_cast<std::size_t>(side(rng)));
    for (auto& row : t) {
      row.resize(static_cast<std::size_t>(side(rng)));
      for (auto& v : row) v = val(rng);
    }
    double mm = -1e300;
    bool orand = false;
    for (const auto& row : t) {
      mm = std::max(mm, *std::min_element(row.begin(), row.end()));
      orand = orand || std::all_of(row.begin(), row.end(), [](double v) { return v >= 0; });
    }
    CHECK((mm >= 0) == orand);
    const CircuitTree num = table_tree(t, CircuitMode::kNumeric);
    const CircuitTree log = table_tree(t, CircuitMode::kLogical);
    CHECK(eval_numeric(num, x) == mm);
    CHECK(eval_logical(log, x) == orand);
    TreeEvaluator ev(num);
    CHECK(ev.numeric_exhaustive(num.root(), x) == mm);
  }
}

TEST_CASE("leaves hold the operand of every state pair") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Fixture f = random_fixture(rng, 17);
    const auto states = f.registry.sigma_bar();
    const CircuitTree tree = build_tree(f.params, states, CircuitMode::kNumeric);
    tree.validate();
    CHECK(tree.leaf_count() == states.size() * states.size());
    CHECK(tree.index_states() == states);
    std::vector<Vector> xs;
    for (int i = 0; i < 3; ++i) xs.push_back(Vector::Random(2) * 2.0);
    std::set<std::pair<std::string, std::string>> pairs;
    const std::size_t d = f.params.arch.depth();
    check_leaves(tree, f.params, tree.root(), std::vector<BitVector>(d), std::vector<BitVector>(d), xs, pairs);
    CHECK(pairs.size() == states.size() * states.size());
  }
}

TEST_CASE("numeric tree reproduces the network on its index states") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const Fixture f = random_fixture(rng);
    const CircuitTree tree = build_numeric_tree(f.params, f.registry);
    TreeEvaluator ev(tree);
    std::size_t covered = 0;
    for (std::uint64_t i = 0; i < f.grid.total_points(); i += 3) {
      const Vector x = f.grid.point(i);
      const auto ref = oracle::forward(f.params, x);
      const ForwardTrace t = forward(f.params, x);
      const double exhaustive = ev.numeric_exhaustive(tree.root(), x);
      CHECK(ev.numeric(x, &t.state) == doctest::Approx(exhaustive).epsilon(1e-12));
      CHECK(ev.numeric(x) == doctest::Approx(exhaustive).epsilon(1e-12));
      if (f.registry.contains(t.state)) {
        ++covered;
        CHECK(exhaustive == doctest::Approx(ref.output).epsilon(1e-9).scale(1.0));
      }
    }
    CHECK(covered > 0);
  }
}

TEST_CASE("logical tree is the sign of its numeric reading") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const Fixture f = random_fixture(rng);
    const auto zero = f.registry.sigma_zero();
    if (zero.empty()) continue;
    const CircuitTree log = build_logical_tree(f.params, f.registry);
    const CircuitTree num = build_tree(f.params, zero, CircuitMode::kNumeric);
    TreeEvaluator le(log), ne(num);
    Matrix pts(2, 200);
    for (Eigen::Index i = 0; i < 200; ++i) pts.col(i) = Vector::Random(2) * 2.0;
    const auto batch = le.logical_batch(pts);
    for (Eigen::Index i = 0; i < 200; ++i) {
      const bool v = le.logical(pts.col(i));
      CHECK(v == (ne.numeric_exhaustive(num.root(), pts.col(i)) >= 0));
      CHECK(static_cast<bool>(batch[static_cast<std::size_t>(i)]) == v);
    }
    const auto bits = le.truth_bits(log.root(), pts);
    for (std::size_t i = 0; i < 200; ++i) CHECK(((bits[i / 64] >> (i % 64)) & 1u) == batch[i]);
  }
}

TEST_CASE("constant circuit when no boundary state exists") {
  MlpParams p = MlpParams::zeros(ArchSpec{2, {2}});
  p.biases[1][0] = 2.0;
  const GridSpec g = GridSpec::uniform(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0), 5);
  const StateRegistry reg = enumerate_states(p, g, {100'000'000, 1});
  const CircuitTree t = build_logical_tree(p, reg);
  CHECK(t.leaf_count() == 1);
  CHECK(eval_logical(t, Vector::Zero(2)));
  CHECK_THROWS_AS(build_tree(p, std::vector<NetworkState>{}, CircuitMode::kLogical), InputError);
  CHECK_THROWS_AS(build_logical_tree(p, StateRegistry(p.arch)), InputError);
}

TEST_CASE("leaf budget is enforced") {
  std::mt19937_64 rng(3);
  const Fixture f = random_fixture(rng);
  const auto states = f.registry.sigma_bar();
  REQUIRE(states.size() >= 2);
  CHECK_THROWS_AS(build_tree(f.params, states, CircuitMode::kNumeric, {states.size()}), ResourceError);
}

TEST_CASE("circuit JSON round trip is exact") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 5; ++trial) {
    const Fixture f = random_fixture(rng, 17);
    for (CircuitMode mode : {CircuitMode::kNumeric, CircuitMode::kLogical}) {
      const CircuitTree tree = build_tree(f.params, f.registry.sigma_bar(), mode);
      const std::string json = circuit_to_json(tree);
      const CircuitTree back = circuit_from_json(json);
      CHECK(circuit_to_json(back) == json);
      CHECK(back.mode() == mode);
      CHECK(back.atom_data() == tree.atom_data());
      CHECK(back.index_states() == tree.index_states());
      for (int i = 0; i < 20; ++i) {
        const Vector x = Vector::Random(2) * 2.0;
        CHECK(eval_numeric(back, x) == eval_numeric(tree, x));
      }
    }
  }
  const fs::path path = fs::temp_directory_path() / "relucirc_test_circuit.json";
  save_circuit(constant_tree(3, -1.5), path);
  CHECK(eval_numeric(load_circuit(path), Vector::Zero(3)) == -1.5);
  fs::remove(path);
  CHECK_THROWS(circuit_from_json("{\"format\": \"something-else\"}"));
  CHECK_THROWS(circuit_from_json("not json"));
}

TEST_CASE("validate rejects malformed trees") {
  CircuitTree t(CircuitMode::kLogical, 1);
  const auto root = t.add_node(NodeKind::kOr, 1, CircuitTree::kNoLabel, 2);
  const double c[2] = {1.0, 0.0};
  const auto atom = t.add_atom(c);
  const auto leaf = t.add_node(NodeKind::kLeaf, 0, CircuitTree::kNoLabel, 0);
  t.set_leaf_atom(leaf, atom);
  t.set_child(root, 0, leaf);
  t.set_child(root, 1, leaf);  // shared
  t.set_root(root);
  CHECK_THROWS_AS(t.validate(), InputError);
  t.set_leaf_atom(leaf, 9);
  t.set_child(root, 1, 7);
  CHECK_THROWS_AS(t.validate(), InputError);
}

TEST_CASE("node paths") {
  CHECK(parse_node_path("root").empty());
  CHECK(parse_node_path("").empty());
  CHECK(parse_node_path("2.0.11") == NodePath{2, 0, 11});
  CHECK(to_string(NodePath{}) == "root");
  CHECK(to_string(NodePath{1, 3}) == "1.3");
  CHECK_THROWS_AS(parse_node_path("1.x"), InputError);
  const CircuitTree t = table_tree({{1, 2}, {3}}, CircuitMode::kNumeric);
  CHECK(t.node(node_at(t, {1, 0})).kind == NodeKind::kLeaf);
  CHECK_THROWS_AS(node_at(t, {2}), InputError);
}

TEST_CASE("splicing a subtree back in changes nothing") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 6; ++trial) {
    const Fixture f = random_fixture(rng, 17);
    const CircuitTree tree = build_logical_tree(f.params, f.registry);
    if (tree.leaf_count() < 2) continue;
    const NodePath path{0};
    const CircuitTree sub = extract_subtree(tree, node_at(tree, path));
    CHECK(sub.leaf_count() == tree.leaf_count(node_at(tree, path)));
    const CircuitTree same = splice(tree, path, sub);
    same.validate();
    CHECK(same.leaf_count() == tree.leaf_count());
    TreeEvaluator full(tree);
    for (int i = 0; i < 100; ++i) {
      const Vector x = Vector::Random(2) * 2.0;
      CHECK(eval_logical(same, x) == eval_logical(tree, x));
      CHECK(eval_numeric(sub, x) == full.numeric(node_at(tree, path), x));
    }
    // constant replacement of the root's first child
    const CircuitTree forced = splice(tree, path, constant_tree(2, 1.0));
    const bool root_is_or = is_join_max(tree.node(tree.root()).kind);
    for (int i = 0; i < 50; ++i) {
      const Vector x = Vector::Random(2) * 2.0;
      if (root_is_or) {
        CHECK(eval_logical(forced, x));
      }
    }
    const CircuitTree whole = splice(tree, {}, constant_tree(2, -1.0));
    CHECK(!eval_logical(whole, Vector::Zero(2)));
    CHECK_THROWS_AS(splice(tree, path, constant_tree(3, 1.0)), InputError);
  }
}

TEST_CASE("probe-driven simplification keeps the truth table") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 6; ++trial) {
    const Fixture f = random_fixture(rng, 33);
    const CircuitTree tree = build_logical_tree(f.params, f.registry);
    Matrix probes(2, static_cast<Eigen::Index>(f.grid.total_points()));
    for (std::uint64_t i = 0; i < f.grid.total_points(); ++i) probes.col(static_cast<Eigen::Index>(i)) = f.grid.point(i);
    const CircuitTree small = simplify_on_probes(tree, probes);
    small.validate();
    CHECK(small.leaf_count() <= tree.leaf_count());
    TreeEvaluator a(tree), b(small);
    CHECK(a.logical_batch(probes) == b.logical_batch(probes));
    const SimplifyResult r = simplify(tree, probes, f.params, f.grid);
    CHECK(r.leaves_before == tree.leaf_count());
    CHECK(r.leaves_after == r.tree.leaf_count());
    if (r.verified) {
      TreeEvaluator c(r.tree);
      CHECK(c.logical_batch(probes) == a.logical_batch(probes));
    } else {
      CHECK(!r.diagnostic.empty());
      CHECK(r.tree.leaf_count() == tree.leaf_count());
    }
  }
}

TEST_CASE("property suite passes and catches a broken operand") {
  PropertySuiteOptions opt;
  opt.trials = 300;
  opt.networks = 8;
  opt.inputs_per_network = 20;
  const PropertyReport good = run_property_suite(opt);
  CHECK(good.passed());
  for (const char* name : {kPropMinMaxBoolean, kPropSaddle, kPropLemma, kPropFlatTree, kPropSigmaPm}) {
    REQUIRE(good.find(name) != nullptr);
    CHECK(good.find(name)->checks > 0);
  }
  opt.operand = [](const MlpParams& p, const NetworkState& mu, const NetworkState& tau) {
    AffineAtom a = net_operand_atom(p, mu, tau);
    a.v[a.v.size() - 1] += mu == tau ? 0.0 : 0.5;
    return a;
  };
  const PropertyReport bad = run_property_suite(opt);
  CHECK(!bad.passed());
  CHECK(!bad.find(kPropLemma)->passed());
}

}
