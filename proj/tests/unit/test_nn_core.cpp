#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "relucirc/dataset.hpp"
#include "relucirc/error.hpp"
#include "relucirc/mlp.hpp"
#include "relucirc/model_io.hpp"
#include "relucirc/operand.hpp"

using namespace relucirc;

TEST_SUITE("nn-core") {

TEST_CASE("forward pass matches the scalar reference") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const ArchSpec arch = oracle::random_arch(rng, 3, 5, 7);
    const MlpParams p = oracle::random_params(arch, rng);
    Evaluator ev(p);
    for (int k = 0; k < 20; ++k) {
      const Vector x = Vector::Random(3) * 2.0;
      const auto ref = oracle::forward(p, x);
      const ForwardTrace t = forward(p, x);
      CHECK(t.output == doctest::Approx(ref.output).epsilon(1e-12));
      NetworkState s;
      CHECK(ev.evaluate(x, &s) == doctest::Approx(ref.output).epsilon(1e-12));
      REQUIRE(t.state.bits.size() == ref.state.size());
      for (std::size_t i = 0; i < ref.state.size(); ++i) {
        CHECK(t.state.bits.get(i) == ref.state[i]);
        CHECK(s.bits.get(i) == ref.state[i]);
      }
    }
  }
}

TEST_CASE("zero preactivation counts as on") {
  MlpParams p = MlpParams::zeros(ArchSpec{1, {1}});
  p.weights[0](0, 0) = 1.0;
  p.weights[1](0, 0) = 1.0;
  const ForwardTrace t = forward(p, Vector::Zero(1));
  CHECK(t.state.bits.get(0));
  CHECK(t.output == 0.0);
}

TEST_CASE("split_signs reconstructs exactly") {
  const Matrix z = Matrix::Zero(3, 4);
  const auto [zp, zm] = split_signs(z);
  CHECK(zp.isZero(0.0));
  CHECK(zm.isZero(0.0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  Matrix m(5, 6);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  const auto [mp, mm] = split_signs(m);
  CHECK((mp - mm) == m);
  CHECK(mp.minCoeff() >= 0.0);
  CHECK(mm.minCoeff() >= 0.0);
}

TEST_CASE("operand atom agrees with the numeric recursion") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 25; ++trial) {
    const ArchSpec arch = oracle::random_arch(rng, 2, 4, 6);
    const MlpParams p = oracle::random_params(arch, rng);
    const std::size_t n = arch.hidden_neuron_count();
    for (int k = 0; k < 10; ++k) {
      std::vector<bool> mu(n), tau(n);
      NetworkState smu{BitVector(n)}, stau{BitVector(n)};
      for (std::size_t i = 0; i < n; ++i) {
        mu[i] = coin(rng);
        tau[i] = coin(rng);
        smu.bits.set(i, mu[i]);
        stau.bits.set(i, tau[i]);
      }
      const Vector x = Vector::Random(2);
      const AffineAtom a = net_operand_atom(p, smu, stau);
      const double ref = oracle::operand(p, mu, tau, x);
      CHECK(a(x) == doctest::Approx(ref).epsilon(1e-10).scale(1.0));
      const auto [f, g] = net_operand_pair(p, smu, stau);
      CHECK(f(x) == doctest::Approx(ref).epsilon(1e-10).scale(1.0));
      CHECK(g(x) == doctest::Approx(oracle::operand(p, tau, mu, x)).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("saddle identity: F(s(x), s(x), x) = N(x)") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const ArchSpec arch = oracle::random_arch(rng, 2, 4, 8);
    const MlpParams p = oracle::random_params(arch, rng);
    for (int k = 0; k < 20; ++k) {
      const Vector x = Vector::Random(2) * 3.0;
      const ForwardTrace t = forward(p, x);
      const double f = net_operand_atom(p, t.state, t.state)(x);
      CHECK(std::abs(f - t.output) <= 1e-9 * std::max(1.0, std::abs(t.output)));
    }
  }
}

TEST_CASE("all_pair_atoms matches pairwise atoms") {
  std::mt19937_64 rng(21);
  const ArchSpec arch{2, {3, 4, 3}};
  const MlpParams p = oracle::random_params(arch, rng);
  std::vector<NetworkState> states;
  for (int k = 0; k < 40; ++k) states.push_back(forward(p, Vector::Random(2) * 4.0).state);
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  const auto flat = all_pair_atoms(p, states);
  const std::size_t n = states.size();
  REQUIRE(flat.size() == n * n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const AffineAtom a = net_operand_atom(p, states[i], states[j]);
      for (int c = 0; c < 3; ++c) CHECK(flat[(i * n + j) * 3 + c] == doctest::Approx(a.v[c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("margin and accuracy") {
  MlpParams p = MlpParams::zeros(ArchSpec{1, {1}});
  p.weights[0](0, 0) = 1.0;
  p.weights[1](0, 0) = 2.0;
  p.biases[1][0] = -1.0;  // N(x) = 2 relu(x) - 1
  Dataset d;
  d.points.resize(1, 3);
  d.points << 0.0, 1.0, 2.0;
  d.labels = {0, 1, 1};
  CHECK(margin(p, d) == doctest::Approx(1.0));  // min(1, 1, 3)
  CHECK(accuracy(p, d) == 1.0);
  d.labels = {1, 1, 1};
  CHECK(margin(p, d) == doctest::Approx(-1.0));
  Dataset empty;
  empty.points.resize(1, 0);
  CHECK_THROWS_AS(margin(p, empty), InputError);
}

TEST_CASE("validate rejects bad shapes and non-finite entries") {
  MlpParams p = MlpParams::zeros(ArchSpec{2, {3}});
  CHECK_NOTHROW(p.validate());
  p.weights[0](0, 0) = std::nan("");
  CHECK_THROWS_AS(p.validate(), InputError);
  p = MlpParams::zeros(ArchSpec{2, {3}});
  p.weights[1].resize(2, 3);
  CHECK_THROWS_AS(p.validate(), InputError);
  CHECK_THROWS_AS((ArchSpec{2, {}}.validate()), InputError);
  CHECK_THROWS_AS((ArchSpec{2, {0}}.validate()), InputError);
}

TEST_CASE("parameter count") {
  CHECK(ArchSpec{2, {6, 6, 6}}.parameter_count() == 18 + 42 + 42 + 7);
  CHECK(ArchSpec{2, {6, 6, 6}}.hidden_neuron_count() == 18);
}

TEST_CASE("model files round-trip bit for bit") {
  std::mt19937_64 rng(2);
  Model m;
  m.mlp = oracle::random_params(ArchSpec{3, {4, 2}}, rng);
  m.bottleneck = AffineMap{Matrix::Random(3, 5), Vector::Random(3)};
  ModelMetadata meta{42, {{"steps", "7"}}};
  ModelMetadata back_meta;
  const Model back = model_from_json(model_to_json(m, meta), &back_meta);
  CHECK(back_meta.seed == 42);
  CHECK(back_meta.training.at("steps") == "7");
  REQUIRE(back.bottleneck.has_value());
  CHECK(back.bottleneck->weight == m.bottleneck->weight);
  CHECK(back.bottleneck->bias == m.bottleneck->bias);
  for (std::size_t l = 0; l < m.mlp.weights.size(); ++l) {
    CHECK(back.mlp.weights[l] == m.mlp.weights[l]);
    CHECK(back.mlp.biases[l] == m.mlp.biases[l]);
  }
  CHECK_THROWS_AS(model_from_json("{\"format\": \"other\"}"), FormatError);
  CHECK_THROWS_AS(model_from_json("not json"), FormatError);
}

}
