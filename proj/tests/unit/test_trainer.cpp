#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "relucirc/dataset.hpp"
#include "relucirc/error.hpp"
#include "relucirc/synthetic.hpp"
#include "relucirc/trainer.hpp"

using namespace relucirc;

namespace {

double reference_loss(const MlpParams& p, const Dataset& d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double z = oracle::forward(p, d.point(i)).output;
    const double y = d.labels[i];
    // log(1 + e^z) - y z, written stably
    s += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
  }
  return s / static_cast<double>(d.size());
}

std::vector<bool> all_states(const MlpParams& p, const Dataset& d) {
  std::vector<bool> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto f = oracle::forward(p, d.point(i));
    out.insert(out.end(), f.state.begin(), f.state.end());
  }
  return out;
}

Dataset noise_data(std::mt19937_64& rng, std::size_t dim, std::size_t m) {
  Dataset d;
  d.points = Matrix::Random(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(m)) * 2.0;
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < m; ++i) d.labels.push_back(coin(rng));
  return d;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("loss matches the reference cross-entropy") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 5; ++t) {
    const MlpParams p = oracle::random_params(oracle::random_arch(rng, 2, 3, 5), rng, 2.0);
    const Dataset d = noise_data(rng, 2, 30);
    CHECK(loss(p, d) == doctest::Approx(reference_loss(p, d)).epsilon(1e-12));
  }
  // large |N| must not overflow
  MlpParams p = MlpParams::zeros(ArchSpec{1, {1}});
  p.biases[1][0] = 800.0;
  Dataset d;
  d.points = Matrix::Zero(1, 1);
  d.labels = {0};
  CHECK(loss(p, d) == doctest::Approx(800.0));
}

TEST_CASE("backprop agrees with central differences") {
  std::mt19937_64 rng(17);
  const double h = 1e-6;
  for (int config = 0; config < 5; ++config) {
    const ArchSpec arch = oracle::random_arch(rng, 2, 4, 6);
    MlpParams p = oracle::random_params(arch, rng);
    const Dataset d = noise_data(rng, 2, 25);
    MlpParams grad;
    loss_and_gradient(p, d, grad);
    std::size_t compared = 0;
    auto check = [&](double& theta, double g) {
      const double keep = theta;
      theta = keep + h;
      const auto sp = all_states(p, d);
      const double lp = reference_loss(p, d);
      theta = keep - h;
      const auto sm = all_states(p, d);
      const double lm = reference_loss(p, d);
      theta = keep;
      if (sp != sm) return;  // a ReLU switches inside the stencil
      const double fd = (lp - lm) / (2 * h);
      CHECK(std::abs(g - fd) <= 1e-4 * std::max({std::abs(g), std::abs(fd), 1e-3}));
      ++compared;
    };
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      for (Eigen::Index i = 0; i < p.weights[l].size(); ++i) check(p.weights[l].data()[i], grad.weights[l].data()[i]);
      for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) check(p.biases[l][i], grad.biases[l][i]);
    }
    CHECK(compared > arch.parameter_count() / 2);
  }
}

TEST_CASE("initialization is seeded and scaled") {
  TrainConfig cfg;
  const ArchSpec arch{2, {50, 50}};
  const MlpParams a = init_params(arch, 9, cfg), b = init_params(arch, 9, cfg), c = init_params(arch, 10, cfg);
  CHECK(a.weights[1] == b.weights[1]);
  CHECK(a.weights[1] != c.weights[1]);
  CHECK(a.biases[0].isZero(0.0));
  const double std1 = layer_init_std(cfg, 50);
  CHECK(std1 == doctest::Approx(0.5 * std::sqrt(2.0 / 50.0)));
  CHECK(a.weights[1].cwiseAbs().maxCoeff() <= 2 * std1);
  const double emp = std::sqrt(a.weights[1].squaredNorm() / static_cast<double>(a.weights[1].size()));
  CHECK(emp == doctest::Approx(std1 * 0.88).epsilon(0.1));  // truncation at 2 std shrinks the spread

  cfg.init_scale = InitScale::kFixed;
  CHECK(layer_init_std(cfg, 50) == cfg.init_std);
  const MlpParams f = init_params(arch, 9, cfg.init_std);
  CHECK(f.weights[1].cwiseAbs().maxCoeff() <= 2 * cfg.init_std);
  CHECK(parse_init_scale("fixed") == InitScale::kFixed);
  CHECK(parse_init_scale("fan_in") == InitScale::kFanIn);
  CHECK_THROWS_AS(parse_init_scale("he"), InputError);
}

TEST_CASE("training fits DataI with non-increasing loss") {
  const Dataset d = gen_synthetic({Tier::kDataI, 50, 0.15, 3});
  TrainConfig cfg;
  cfg.seed = 3;
  cfg.steps = 3000;
  cfg.snapshot_every = 500;
  const TrainRun run = train(d, ArchSpec{2, {6, 6, 6}}, cfg);
  REQUIRE(run.snapshots.size() == 7);
  CHECK(run.snapshots.front().step == 0);
  CHECK(run.snapshots.back().step == 3000);
  CHECK(accuracy(run.final, d) == 1.0);
  for (std::size_t i = 1; i < run.snapshots.size(); ++i) {
    CHECK(run.snapshots[i].loss <= run.snapshots[i - 1].loss);
  }
  const TrainRun again = train(d, ArchSpec{2, {6, 6, 6}}, cfg);
  CHECK(again.final.mlp.weights[2] == run.final.mlp.weights[2]);
}

TEST_CASE("stalled starts are redrawn from a derived seed") {
  const Dataset d = gen_synthetic({Tier::kDataI, 30, 0.15, 1});
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.steps = 120;
  cfg.init_scale = InitScale::kFixed;  // nine layers at std 0.05 never move
  cfg.stall_steps = 60;
  cfg.max_restarts = 2;
  const TrainRun run = train(d, ArchSpec{2, std::vector<std::size_t>(9, 6)}, cfg);
  CHECK(run.restarts == 2);
  CHECK(run.init_seed == 5 + 2 * 0x9e3779b97f4a7c15ULL);
  CHECK(run.snapshots.back().step == 120);  // the last attempt runs to completion

  cfg.max_restarts = 0;
  const TrainRun plain = train(d, ArchSpec{2, std::vector<std::size_t>(9, 6)}, cfg);
  CHECK(plain.restarts == 0);
  CHECK(plain.init_seed == 5);
}

TEST_CASE("bottleneck training keeps a linear first layer") {
  std::mt19937_64 rng(1);
  Dataset d = noise_data(rng, 10, 40);
  TrainConfig cfg;
  cfg.steps = 200;
  const TrainRun run = train_bottleneck(d, ArchSpec{0, {4}}, 3, cfg);
  REQUIRE(run.final.bottleneck.has_value());
  CHECK(run.final.bottleneck->weight.rows() == 3);
  CHECK(run.final.bottleneck->weight.cols() == 10);
  CHECK(run.final.mlp.arch.input_dim == 3);
  const Vector x = d.point(0);
  CHECK(run.final.output(x) == doctest::Approx(oracle::forward(run.final.mlp, run.final.bottleneck->apply(x)).output));
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = TrainConfig{};
  c.steps = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = TrainConfig{};
  c.beta1 = 1.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = TrainConfig{};
  c.init_gain = -1;
  CHECK_THROWS_AS(c.validate(), InputError);
  Dataset empty;
  empty.points.resize(2, 0);
  CHECK_THROWS_AS(train(empty, ArchSpec{2, {3}}, TrainConfig{}), InputError);
}

TEST_CASE("training runs round-trip through disk") {
  const Dataset d = gen_synthetic({Tier::kDataI, 20, 0.15, 2});
  TrainConfig cfg;
  cfg.steps = 100;
  cfg.snapshot_every = 50;
  const TrainRun run = train(d, ArchSpec{2, {3, 3}}, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "relucirc_test_run";
  std::filesystem::remove_all(dir);
  write_train_run(run, cfg, dir);
  const TrainRun back = read_train_run(dir);
  REQUIRE(back.snapshots.size() == run.snapshots.size());
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    CHECK(back.snapshots[i].step == run.snapshots[i].step);
    CHECK(back.snapshots[i].model.mlp.weights[1] == run.snapshots[i].model.mlp.weights[1]);
  }
  CHECK(back.final.mlp.weights[0] == run.final.mlp.weights[0]);
  std::filesystem::remove_all(dir);
}

}
