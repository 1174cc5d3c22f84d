#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "relucirc/dataset.hpp"
#include "relucirc/mlp.hpp"
#include "relucirc/model_io.hpp"

namespace relucirc {

enum class InitScale {
  kFixed,  // every layer uses init_std
  kFanIn,  // layer l uses init_gain * sqrt(2 / fan_in_l)
};

const char* to_string(InitScale s);
InitScale parse_init_scale(const std::string& s);

struct TrainConfig {
  double learning_rate = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t steps = 20000;
  std::size_t batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;
  double init_std = 0.05;
  InitScale init_scale = InitScale::kFanIn;
  double init_gain = 0.5;
  std::size_t snapshot_every = 100;  // 0 = only first and last step
  // A start whose loss has dropped by less than 1% after stall_steps is
  // redrawn from a derived seed, at most max_restarts times. 0 disables.
  std::size_t stall_steps = 1000;
  std::size_t max_restarts = 4;

  void validate() const;
};

struct Snapshot {
  std::size_t step = 0;
  Model model;
  double train_accuracy = 0.0;
  double loss = 0.0;
};

/// Snapshots are ordered by step and always include step 0 and the last step;
/// `final` equals the last snapshot's model.
struct TrainRun {
  std::vector<Snapshot> snapshots;
  Model final;
  std::uint64_t init_seed = 0;
  std::size_t restarts = 0;
};

/// Weights i.i.d. N(0, init_std^2) redrawn outside +-2 init_std; biases zero.
MlpParams init_params(const ArchSpec& arch, std::uint64_t seed, double init_std);
MlpParams init_params(const ArchSpec& arch, std::uint64_t seed, const TrainConfig& cfg);
double layer_init_std(const TrainConfig& cfg, std::size_t fan_in);

/// Mean sigmoid cross-entropy of N(x) against y in {0,1}, with its gradient
/// written into `grad` (same shapes as `params`).
double loss_and_gradient(const MlpParams& params, const Dataset& data, MlpParams& grad);
double loss(const MlpParams& params, const Dataset& data);

/// Adam on the logistic loss. Throws TrainingError if the loss turns non-finite.
TrainRun train(const Dataset& data, const ArchSpec& arch, const TrainConfig& cfg);

/// Same, with a linear (no ReLU) layer 784 -> bottleneck_width in front of
/// `base`. `base.input_dim` is overwritten with bottleneck_width.
TrainRun train_bottleneck(const Dataset& data, ArchSpec base, std::size_t bottleneck_width,
                          const TrainConfig& cfg);

/// Writes model.json, snapshots/step_XXXXXX.json and the index snapshots.json into `dir`.
void write_train_run(const TrainRun& run, const TrainConfig& cfg, const std::filesystem::path& dir);
/// Reads back what write_train_run wrote.
TrainRun read_train_run(const std::filesystem::path& dir);

}  // namespace relucirc
