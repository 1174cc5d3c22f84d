#include "relucirc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <random>

#include "json_util.hpp"
#include "relucirc/error.hpp"
#include "relucirc/log.hpp"

namespace relucirc {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InputError("learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw InputError("Adam betas must lie in (0,1)");
  }
  if (steps == 0) throw InputError("steps must be at least 1");
  if (!(init_std > 0.0)) throw InputError("init_std must be positive");
  if (!(init_gain > 0.0)) throw InputError("init_gain must be positive");
}

namespace {

// A stack of dense layers; every layer but the last applies ReLU unless
// relu[l] is false (used for the linear bottleneck).
struct Stack {
  std::vector<Matrix> w;
  std::vector<Vector> b;
  std::vector<bool> relu;
};

Matrix truncated_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double std) {
  std::normal_distribution<double> gauss(0.0, std);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      double v = gauss(rng);
      while (std::abs(v) > 2.0 * std) v = gauss(rng);
      m(r, c) = v;
    }
  }
  return m;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Mean loss; fills gradients when gw/gb are non-null.
double stack_loss(const Stack& s, const Matrix& x, const std::vector<std::uint8_t>& labels,
                  const std::vector<std::size_t>* batch, std::vector<Matrix>* gw, std::vector<Vector>* gb) {
  const std::size_t layers = s.w.size();
  Matrix input;
  const Matrix* a0 = &x;
  if (batch != nullptr) {
    input.resize(x.rows(), static_cast<Eigen::Index>(batch->size()));
    for (std::size_t k = 0; k < batch->size(); ++k) {
      input.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>((*batch)[k]));
    }
    a0 = &input;
  }
  const Eigen::Index m = a0->cols();
  auto label = [&](Eigen::Index i) {
    const std::size_t idx = batch != nullptr ? (*batch)[static_cast<std::size_t>(i)] : static_cast<std::size_t>(i);
    return static_cast<double>(labels[idx]);
  };

  std::vector<Matrix> acts(layers + 1);
  std::vector<Matrix> pre(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& in = l == 0 ? *a0 : acts[l];
    pre[l] = s.w[l] * in;
    pre[l].colwise() += s.b[l];
    acts[l + 1] = (l + 1 < layers && s.relu[l]) ? Matrix(pre[l].cwiseMax(0.0)) : pre[l];
  }

  const Matrix& z = pre[layers - 1];
  double total = 0.0;
  Matrix delta(1, m);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double y = label(i);
    total += softplus(z(0, i)) - y * z(0, i);
    delta(0, i) = (sigmoid(z(0, i)) - y) * inv_m;
  }
  const double mean = total * inv_m;
  if (gw == nullptr) return mean;

  gw->resize(layers);
  gb->resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& in = l == 0 ? *a0 : acts[l];
    (*gw)[l].noalias() = delta * in.transpose();
    (*gb)[l] = delta.rowwise().sum();
    if (l == 0) break;
    Matrix back = s.w[l].transpose() * delta;
    if (s.relu[l - 1]) back = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    delta = std::move(back);
  }
  return mean;
}

Stack to_stack(const Model& model) {
  Stack s;
  if (model.bottleneck) {
    s.w.push_back(model.bottleneck->weight);
    s.b.push_back(model.bottleneck->bias);
    s.relu.push_back(false);
  }
  for (std::size_t l = 0; l < model.mlp.weights.size(); ++l) {
    s.w.push_back(model.mlp.weights[l]);
    s.b.push_back(model.mlp.biases[l]);
    s.relu.push_back(l + 1 < model.mlp.weights.size());
  }
  return s;
}

void from_stack(const Stack& s, Model& model) {
  std::size_t k = 0;
  if (model.bottleneck) {
    model.bottleneck->weight = s.w[0];
    model.bottleneck->bias = s.b[0];
    k = 1;
  }
  for (std::size_t l = 0; l < model.mlp.weights.size(); ++l, ++k) {
    model.mlp.weights[l] = s.w[k];
    model.mlp.biases[l] = s.b[k];
  }
}

std::optional<TrainRun> run_adam(const Dataset& data, Model model, const TrainConfig& cfg, bool allow_stall) {
  cfg.validate();
  data.validate();
  if (data.size() == 0) throw InputError("cannot train on an empty dataset");
  if (data.dim() != model.input_dim()) throw InputError("dataset dimension does not match the network input");

  Stack s = to_stack(model);
  std::vector<Matrix> mw, vw, gw;
  std::vector<Vector> mb, vb, gb;
  for (std::size_t l = 0; l < s.w.size(); ++l) {
    mw.push_back(Matrix::Zero(s.w[l].rows(), s.w[l].cols()));
    vw.push_back(mw.back());
    mb.push_back(Vector::Zero(s.b[l].size()));
    vb.push_back(mb.back());
  }

  const bool minibatch = cfg.batch_size > 0 && cfg.batch_size < data.size();
  std::mt19937_64 batch_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t cursor = perm.size();
  std::vector<std::size_t> batch;

  TrainRun run;
  auto snapshot = [&](std::size_t step) {
    from_stack(s, model);
    Snapshot snap;
    snap.step = step;
    snap.model = model;
    snap.loss = stack_loss(s, data.points, data.labels, nullptr, nullptr, nullptr);
    snap.train_accuracy = accuracy(model, data);
    run.snapshots.push_back(std::move(snap));
  };
  snapshot(0);

  double b1t = 1.0;
  double b2t = 1.0;
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    const std::vector<std::size_t>* bp = nullptr;
    if (minibatch) {
      batch.clear();
      while (batch.size() < cfg.batch_size) {
        if (cursor == perm.size()) {
          std::shuffle(perm.begin(), perm.end(), batch_rng);
          cursor = 0;
        }
        batch.push_back(perm[cursor++]);
      }
      bp = &batch;
    }
    const double l = stack_loss(s, data.points, data.labels, bp, &gw, &gb);
    if (!std::isfinite(l)) {
      throw TrainingError("loss became non-finite at step " + std::to_string(step));
    }
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    const double lr_t = cfg.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
    const double eps_hat = cfg.epsilon * std::sqrt(1.0 - b2t);
    for (std::size_t k = 0; k < s.w.size(); ++k) {
      mw[k] = cfg.beta1 * mw[k] + (1.0 - cfg.beta1) * gw[k];
      vw[k] = cfg.beta2 * vw[k] + (1.0 - cfg.beta2) * gw[k].cwiseAbs2();
      s.w[k].array() -= lr_t * mw[k].array() / (vw[k].array().sqrt() + eps_hat);
      mb[k] = cfg.beta1 * mb[k] + (1.0 - cfg.beta1) * gb[k];
      vb[k] = cfg.beta2 * vb[k] + (1.0 - cfg.beta2) * gb[k].cwiseAbs2();
      s.b[k].array() -= lr_t * mb[k].array() / (vb[k].array().sqrt() + eps_hat);
    }
    if (step == cfg.steps || (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0)) snapshot(step);
    if (!allow_stall && step == cfg.stall_steps &&
        stack_loss(s, data.points, data.labels, nullptr, nullptr, nullptr) > 0.99 * run.snapshots.front().loss) {
      return std::nullopt;
    }
  }
  from_stack(s, model);
  run.final = model;
  return run;
}


template <typename Attempt>
TrainRun with_restarts(const TrainConfig& cfg, Attempt attempt) {
  const std::size_t tries = cfg.stall_steps > 0 && cfg.stall_steps < cfg.steps ? cfg.max_restarts + 1 : 1;
  for (std::size_t r = 0; r < tries; ++r) {
    const std::uint64_t seed = cfg.seed + r * 0x9e3779b97f4a7c15ull;
    std::optional<TrainRun> run = attempt(seed, r + 1 == tries);
    if (run) {
      run->init_seed = seed;
      run->restarts = r;
      return std::move(*run);
    }
    log_info("training stalled at the start; redrawing the initialization");
  }
  throw TrainingError("unreachable");
}

}  // namespace

const char* to_string(InitScale s) { return s == InitScale::kFanIn ? "fan_in" : "fixed"; }

InitScale parse_init_scale(const std::string& s) {
  if (s == "fixed") return InitScale::kFixed;
  if (s == "fan_in") return InitScale::kFanIn;
  throw InputError("unknown init scale '" + s + "' (expected fixed or fan_in)");
}

double layer_init_std(const TrainConfig& cfg, std::size_t fan_in) {
  if (cfg.init_scale == InitScale::kFixed) return cfg.init_std;
  return cfg.init_gain * std::sqrt(2.0 / static_cast<double>(fan_in));
}

MlpParams init_params(const ArchSpec& arch, std::uint64_t seed, const TrainConfig& cfg) {
  MlpParams p = MlpParams::zeros(arch);
  std::mt19937_64 rng(seed);
  for (auto& w : p.weights) {
    w = truncated_normal(w.rows(), w.cols(), rng, layer_init_std(cfg, static_cast<std::size_t>(w.cols())));
  }
  return p;
}

MlpParams init_params(const ArchSpec& arch, std::uint64_t seed, double init_std) {
  TrainConfig cfg;
  cfg.init_scale = InitScale::kFixed;
  cfg.init_std = init_std;
  return init_params(arch, seed, cfg);
}

double loss_and_gradient(const MlpParams& params, const Dataset& data, MlpParams& grad) {
  params.validate();
  if (data.dim() != params.arch.input_dim) throw InputError("dataset dimension does not match the network input");
  Stack s = to_stack(Model{std::nullopt, params});
  std::vector<Matrix> gw;
  std::vector<Vector> gb;
  const double l = stack_loss(s, data.points, data.labels, nullptr, &gw, &gb);
  grad.arch = params.arch;
  grad.weights = std::move(gw);
  grad.biases = std::move(gb);
  return l;
}

double loss(const MlpParams& params, const Dataset& data) {
  Stack s = to_stack(Model{std::nullopt, params});
  return stack_loss(s, data.points, data.labels, nullptr, nullptr, nullptr);
}

TrainRun train(const Dataset& data, const ArchSpec& arch, const TrainConfig& cfg) {
  return with_restarts(cfg, [&](std::uint64_t seed, bool last) {
    return run_adam(data, Model{std::nullopt, init_params(arch, seed, cfg)}, cfg, last);
  });
}

TrainRun train_bottleneck(const Dataset& data, ArchSpec base, std::size_t bottleneck_width,
                          const TrainConfig& cfg) {
  if (bottleneck_width == 0) throw InputError("bottleneck width must be positive");
  base.input_dim = bottleneck_width;
  return with_restarts(cfg, [&](std::uint64_t seed, bool last) {
    std::mt19937_64 rng(seed);
    Model model;
    model.bottleneck = AffineMap{truncated_normal(static_cast<Eigen::Index>(bottleneck_width),
                                                  static_cast<Eigen::Index>(data.dim()), rng, cfg.init_std),
                                 Vector::Zero(static_cast<Eigen::Index>(bottleneck_width))};
    model.mlp = MlpParams::zeros(base);
    for (auto& w : model.mlp.weights) {
      w = truncated_normal(w.rows(), w.cols(), rng, layer_init_std(cfg, static_cast<std::size_t>(w.cols())));
    }
    return run_adam(data, std::move(model), cfg, last);
  });
}

void write_train_run(const TrainRun& run, const TrainConfig& cfg, const std::filesystem::path& dir) {
  using detail::json;
  std::filesystem::create_directories(dir / "snapshots");
  json steps = json::array();
  ModelMetadata meta;
  meta.seed = cfg.seed;
  meta.training = {{"learning_rate", detail::hex_double(cfg.learning_rate)},
                   {"steps", std::to_string(cfg.steps)},
                   {"init_scale", to_string(cfg.init_scale)},
                   {"init_gain", detail::hex_double(cfg.init_gain)},
                   {"init_seed", std::to_string(run.init_seed)},
                   {"restarts", std::to_string(run.restarts)},
                   {"batch_size", std::to_string(cfg.batch_size)},
                   {"init_std", detail::hex_double(cfg.init_std)}};
  for (const Snapshot& s : run.snapshots) {
    char name[64];
    std::snprintf(name, sizeof name, "step_%06zu.json", s.step);
    save_model(s.model, meta, dir / "snapshots" / name);
    steps.push_back({{"step", s.step},
                     {"file", std::string("snapshots/") + name},
                     {"train_accuracy", s.train_accuracy},
                     {"loss", s.loss}});
  }
  save_model(run.final, meta, dir / "model.json");
  detail::write_json_file(dir / "snapshots.json",
                          json{{"seed", cfg.seed}, {"steps", cfg.steps}, {"snapshots", std::move(steps)}});
}

TrainRun read_train_run(const std::filesystem::path& dir) {
  const detail::json j = detail::read_json_file(dir / "snapshots.json");
  TrainRun run;
  try {
    for (const auto& s : j.at("snapshots")) {
      Snapshot snap;
      snap.step = s.at("step").get<std::size_t>();
      snap.train_accuracy = s.at("train_accuracy").get<double>();
      snap.loss = s.at("loss").get<double>();
      snap.model = load_model(dir / s.at("file").get<std::string>());
      run.snapshots.push_back(std::move(snap));
    }
  } catch (const detail::json::exception& e) {
    throw FormatError((dir / "snapshots.json").string() + ": " + e.what());
  }
  ModelMetadata meta;
  run.final = load_model(dir / "model.json", &meta);
  const auto it = meta.training.find("init_seed");
  if (it != meta.training.end()) run.init_seed = std::stoull(it->second);
  const auto rs = meta.training.find("restarts");
  if (rs != meta.training.end()) run.restarts = std::stoull(rs->second);
  return run;
}

}  // namespace relucirc
