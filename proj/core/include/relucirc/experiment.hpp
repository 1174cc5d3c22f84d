#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "relucirc/capacity.hpp"
#include "relucirc/config.hpp"
#include "relucirc/interpret.hpp"
#include "relucirc/synthetic.hpp"
#include "relucirc/trainer.hpp"
#include "relucirc/verify.hpp"

namespace relucirc {

struct ArchPreset {
  std::string name;
  std::vector<std::size_t> hidden_widths;

  ArchSpec spec(std::size_t input_dim = 2) const { return ArchSpec{input_dim, hidden_widths}; }
};

/// ArchI = (6,6,6); ArchII and ArchIII append (6,6,6) once and twice.
std::vector<ArchPreset> default_arch_presets();

struct ExperimentMatrixConfig {
  std::vector<Tier> tiers{Tier::kDataI, Tier::kDataII, Tier::kDataIII};
  std::vector<ArchPreset> arches = default_arch_presets();
  std::vector<std::uint64_t> seeds{1};
  std::size_t samples_per_class = 100;
  double noise_std = 0.15;
  TrainConfig train = [] {
    TrainConfig t;
    t.snapshot_every = 250;
    return t;
  }();
  std::size_t grid_resolution = 512;
  double grid_expand = 0.25;
  std::size_t series_resolution = 128;  // per-snapshot state enumeration
  std::size_t nsb_resolution = 200;
  std::size_t region_raster = 120;
  std::size_t fine_factor = 2;
  VerifyOptions verify;
  std::size_t threads = 0;  // cells run concurrently on up to this many workers
  bool figures = true;
  bool write_numeric_circuit = false;

  /// Throws InputError on an empty axis or arches not nested by prefix.
  void validate() const;

  /// Reads the [matrix], [arch], [data], [train], [grid] and [verify]
  /// sections. Unknown keys in those sections are rejected; other sections
  /// are ignored.
  static ExperimentMatrixConfig from_config(const Config& config);
};

/// Applies [train] settings onto `base`.
TrainConfig train_config_from(const Config& config, TrainConfig base = {});

/// Bounds of one model: boundary states enumerated (and refined) on `grid`,
/// margin over `data`.
BoundRow bound_row(const MlpParams& params, const Dataset& data, const GridSpec& grid, std::size_t threads = 0);

/// bound_row for every snapshot of a run, with step and train accuracy filled in.
std::vector<BoundRow> bound_series(const TrainRun& run, const Dataset& data, const GridSpec& grid,
                                   std::size_t threads = 0);

struct CellResult {
  Tier tier = Tier::kDataI;
  std::string arch;
  std::uint64_t seed = 0;
  std::string status = "ok";  // "ok" or the failing stage and message
  std::filesystem::path dir;

  std::size_t samples = 0;
  double train_accuracy = 0.0;
  std::size_t restarts = 0;
  std::size_t states = 0;
  std::size_t boundary_states = 0;
  ReducedDescription description;
  double vc_bool = 0.0;
  double vc_nodata = 0.0;
  double gamma = 0.0;
  double gamma_bool = 0.0;
  NormBounds norms;
  std::size_t numeric_leaves = 0;
  std::size_t logical_leaves = 0;
  EquivalenceReport numeric;
  EquivalenceReport logical;
  std::vector<BoundRow> series;
  double seconds = 0.0;

  bool ok() const { return status == "ok"; }
  bool verified() const { return ok() && numeric.pass && logical.pass; }
};

struct MatrixResult {
  std::vector<CellResult> cells;
  std::filesystem::path dir;

  bool all_verified() const;
  const CellResult* find(Tier tier, const std::string& arch, std::uint64_t seed) const;
};

/// gen data -> train -> enumerate states -> both trees and their checks ->
/// reduced description and bounds -> per-snapshot bound series -> figures.
/// Artifacts go to `dir`. Stage failures are caught and recorded in status.
CellResult run_cell(const ExperimentMatrixConfig& cfg, Tier tier, const ArchPreset& arch, std::uint64_t seed,
                    const std::filesystem::path& dir);

/// Runs every (tier, arch, seed) cell under `dir`/<tier>_<arch>_s<seed>,
/// then writes summary.csv, summary.md, the by-architecture figures and
/// manifest.json.
MatrixResult run_experiment_matrix(const ExperimentMatrixConfig& cfg, const std::filesystem::path& dir);

/// summary.csv and summary.md; contents depend only on the cell results.
void write_summary(const MatrixResult& result, const ExperimentMatrixConfig& cfg, const std::filesystem::path& dir);

struct MnistExperimentConfig {
  std::filesystem::path data_dir = "data/mnist";
  std::size_t train_size = 1000;
  std::size_t validation_size = 1000;
  std::size_t test_size = 1000;
  std::uint64_t seed = 1;
  BottleneckArch arch{ArchSpec{4, {6, 6, 6, 6, 6, 6, 6, 6, 6}}, 4};
  TrainConfig host_train = [] {
    TrainConfig t;
    t.snapshot_every = 0;
    return t;
  }();
  CircuitBuildConfig circuit;
  double gap_threshold = 0.25;
  std::size_t scan_depth = 2;
  double prosthetic_true_fraction = 0.3;
  std::optional<ArchSpec> prosthetic_base;       // host base when unset
  std::optional<TrainConfig> prosthetic_train;  // host_train when unset
  double prosthetic_min_accuracy = 0.9;
  bool splice = true;
  bool figures = true;

  void validate() const;
  /// Reads the [mnist] section (and [train] for the host run).
  static MnistExperimentConfig from_config(const Config& config);
};

struct MnistExperimentResult {
  Model host;
  double host_train_accuracy = 0.0;
  double host_test_accuracy = 0.0;
  std::size_t states = 0;
  std::size_t boundary_states = 0;
  std::size_t leaves = 0;
  double circuit_train_accuracy = 0.0;
  double circuit_test_accuracy = 0.0;
  std::size_t enumerated_test = 0;  // test samples whose bottleneck state was enumerated
  std::size_t agreeing_test = 0;    // of those, circuit sign == host sign
  std::vector<MemorizationFlag> flags;
  std::vector<NodePath> candidates;
  std::optional<ProstheticReport> prosthetic;
  std::string prosthetic_error;

  double sign_agreement() const {
    return enumerated_test == 0 ? 0.0 : static_cast<double>(agreeing_test) / static_cast<double>(enumerated_test);
  }
  bool improved() const { return prosthetic && prosthetic->test_after > prosthetic->test_before; }
};

/// Host training on the bottleneck architecture, circuit extraction, probe
/// arrays for the top-level nodes, the memorization scan and (when enabled)
/// the prosthetic splice. Artifacts and manifest.json go to `dir`.
MnistExperimentResult run_mnist_experiment(const MnistExperimentConfig& cfg, const std::filesystem::path& dir);

}  // namespace relucirc
