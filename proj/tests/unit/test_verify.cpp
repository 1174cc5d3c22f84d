#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "relucirc/circuit.hpp"
#include "relucirc/circuit_edit.hpp"
#include "relucirc/error.hpp"
#include "relucirc/registry.hpp"
#include "relucirc/synthetic.hpp"
#include "relucirc/trainer.hpp"
#include "relucirc/verify.hpp"

#include "json.hpp"

using namespace relucirc;
namespace fs = std::filesystem;

namespace {

struct Trained {
  MlpParams params;
  GridSpec grid;
  StateRegistry registry;
};

const Trained& trained_dataII() {
  static const Trained t = [] {
    Trained out;
    const Dataset d = gen_synthetic({Tier::kDataII, 50, 0.15, 2});
    TrainConfig cfg;
    cfg.steps = 1500;
    cfg.learning_rate = 0.01;
    cfg.seed = 2;
    cfg.snapshot_every = 0;
    out.params = train(d, ArchSpec{2, {6, 6}}, cfg).final.mlp;
    out.grid = grid_around(d, 96, 0.25);
    out.registry = refine_boundary(out.params, enumerate_states(out.params, out.grid), out.grid);
    return out;
  }();
  return t;
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("extracted circuits verify against their network") {
  const Trained& t = trained_dataII();
  REQUIRE(t.registry.boundary_count() > 0);
  const CircuitTree num = build_numeric_tree(t.params, t.registry);
  const EquivalenceReport rn = verify_numeric(t.params, num, t.grid);
  CHECK(rn.pass);
  CHECK(rn.guaranteed_points == rn.points);
  CHECK(rn.max_scaled_diff_guaranteed <= 1e-6);
  const CircuitTree log = build_logical_tree(t.params, t.registry);
  const EquivalenceReport rl = verify_logical(t.params, log, t.registry, t.grid, 2);
  CHECK(rl.pass);
  CHECK(rl.agreement == 1.0);
  CHECK(rl.fine_points == t.grid.refined(2).total_points());
  CHECK(rl.fine_agreement >= 0.999);
  CHECK(rl.unattributable == 0);
  for (const auto& d : rl.disagreements) CHECK(d.attributable());
}

TEST_CASE("numeric check catches a perturbed atom") {
  const Trained& t = trained_dataII();
  const CircuitTree num = build_numeric_tree(t.params, t.registry);
  CircuitTree bad = num;
  std::vector<double> atoms = bad.atom_data();
  for (std::size_t i = 2; i < atoms.size(); i += 3) atoms[i] += 1e-3;  // shift every constant
  bad.set_atoms(atoms);
  const EquivalenceReport r = verify_numeric(t.params, bad, t.grid);
  CHECK(!r.pass);
  CHECK(r.max_abs_diff_guaranteed == doctest::Approx(1e-3).epsilon(1e-6));
  CHECK(!r.disagreements.empty());
  CHECK(r.disagreements.size() <= VerifyOptions{}.max_logged);
}

TEST_CASE("logical check catches a forced subtree") {
  const Trained& t = trained_dataII();
  const CircuitTree log = build_logical_tree(t.params, t.registry);
  REQUIRE(log.node(log.root()).count > 0);
  for (double c : {1.0, -1.0}) {
    const CircuitTree bad = splice(log, {0}, constant_tree(2, c));
    const EquivalenceReport r = verify_logical(t.params, bad, t.registry, t.grid, 2);
    // forcing a child of an OR to True (or of an AND to False) flips some region
    if (is_join_max(log.node(log.root()).kind) == (c > 0)) {
      CHECK(!r.pass);
      CHECK(r.agreement < 1.0);
      CHECK(r.unattributable > 0);
    }
  }
  const CircuitTree never = constant_tree(2, -1.0);
  CHECK(!verify_logical(t.params, never, t.registry, t.grid, 2).pass);
}

TEST_CASE("misses on states outside the registry are attributable") {
  const Trained& t = trained_dataII();
  // a registry from a much coarser grid leaves states out; the logical tree
  // built from it may miss on the fine grid, but only on unseen states or NSBs
  const GridSpec coarse = GridSpec::uniform(t.grid.lower, t.grid.upper, 6);
  const StateRegistry small = enumerate_states(t.params, coarse);
  if (small.boundary_count() == 0) return;
  const CircuitTree log = build_logical_tree(t.params, small);
  const EquivalenceReport r = verify_logical(t.params, log, small, t.grid, 2);
  for (const auto& d : r.disagreements) {
    if (d.state_enumerated) {
      CHECK(d.min_abs_preactivation <= 1e-9);
    }
  }
  Disagreement d;
  d.state_enumerated = true;
  d.min_abs_preactivation = 0.5;
  CHECK(!d.attributable());
  d.state_enumerated = false;
  CHECK(d.attributable());
}

TEST_CASE("reports serialize") {
  const Trained& t = trained_dataII();
  const CircuitTree log = build_logical_tree(t.params, t.registry);
  const EquivalenceReport r = verify_logical(t.params, log, t.registry, t.grid, 2);
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.at("pass").get<bool>() == r.pass);
  CHECK(j.at("fine_agreement").get<double>() == doctest::Approx(r.fine_agreement));
  const fs::path path = fs::temp_directory_path() / "relucirc_test_verify.json";
  write_report(r, path);
  std::ifstream in(path);
  CHECK(nlohmann::json::parse(in).at("mode").get<std::string>() == "logical");
  fs::remove(path);
}

TEST_CASE("dimension mismatches are rejected") {
  const Trained& t = trained_dataII();
  CHECK_THROWS_AS(verify_numeric(t.params, constant_tree(3, 1.0), t.grid), InputError);
}

}
