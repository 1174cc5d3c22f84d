// relucirc command-line tool.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relucirc/capacity.hpp"
#include "relucirc/circuit.hpp"
#include "relucirc/circuit_edit.hpp"
#include "relucirc/circuit_io.hpp"
#include "relucirc/config.hpp"
#include "relucirc/error.hpp"
#include "relucirc/experiment.hpp"
#include "relucirc/figures.hpp"
#include "relucirc/interpret.hpp"
#include "relucirc/log.hpp"
#include "relucirc/mnist.hpp"
#include "relucirc/model_io.hpp"
#include "relucirc/registry.hpp"
#include "relucirc/synthetic.hpp"
#include "relucirc/trainer.hpp"
#include "relucirc/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace relucirc;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out_dir;
  std::string config_path;
  std::size_t threads = 0;
  bool quiet = false;
  Config config;
};

fs::path out_dir(const Globals& g, const std::string& command) {
  return g.out_dir.empty() ? fs::path("runs") / command : fs::path(g.out_dir);
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v == 0) throw InputError("bad width list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty width list");
  return out;
}

// Preset name (ArchI, ArchII, ArchIII) or comma-separated widths.
std::vector<std::size_t> arch_widths(const std::string& text) {
  for (const auto& p : default_arch_presets()) {
    if (p.name == text) return p.hidden_widths;
  }
  return parse_widths(text);
}

// Records what a command produced; every command writes one into its run directory.
void write_manifest(const fs::path& dir, const std::string& command, const Globals& g, json outputs,
                    double seconds) {
  fs::create_directories(dir);
  json j{{"tool", "relucirc"},
         {"command", command},
         {"seed", g.seed},
         {"config", g.config_path},
         {"outputs", std::move(outputs)},
         {"seconds", seconds}};
  std::ofstream out(dir / (command == "matrix" ? "cli_manifest.json" : "manifest.json"));
  out << j.dump(1) << '\n';
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// Data for a model's circuit coordinates: raw CSV data passed through the bottleneck.
Dataset circuit_data(const Model& model, const fs::path& data_path) {
  const Dataset raw = read_dataset_csv(data_path);
  if (raw.dim() != model.input_dim()) {
    throw InputError("data has " + std::to_string(raw.dim()) + " columns, the model expects " +
                     std::to_string(model.input_dim()));
  }
  return to_circuit_coordinates(model, raw);
}

std::size_t default_resolution(const Model& model) { return model.bottleneck ? 16 : 512; }

GridSpec verify_grid(const Dataset& z, std::size_t resolution, double expand) {
  return grid_around(z, resolution, expand);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ReLU network to logical circuit conversion, verification and capacity bounds"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--out-dir", g.out_dir, "Run directory (default runs/<command>)");
  app.add_option("--config", g.config_path, "INI-style config file")->check(CLI::ExistingFile);
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
  app.add_flag("-q,--quiet", g.quiet, "Only print warnings");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic or MNIST dataset as CSV");
  std::string tier_text = "DataI";
  std::size_t per_class = 100;
  double noise = 0.15;
  std::string mnist_dir;
  std::string mnist_split = "train";
  std::size_t mnist_size = 1000;
  gen->add_option("--tier", tier_text, "DataI, DataII or DataIII");
  gen->add_option("--samples-per-class", per_class, "Points per band");
  gen->add_option("--noise", noise, "Noise standard deviation");
  gen->add_option("--mnist", mnist_dir, "Directory with MNIST IDX files (binary 0-4 vs 5-9)");
  gen->add_option("--split", mnist_split, "MNIST file: train or test")->check(CLI::IsMember({"train", "test"}));
  gen->add_option("--size", mnist_size, "MNIST samples to draw");
  std::string out_file;
  gen->add_option("--out", out_file, "Output CSV (default <out-dir>/data.csv)");

  // train
  auto* tr = app.add_subcommand("train", "Train a network with Adam on sigmoid cross-entropy");
  std::string data_path;
  std::string arch_text = "ArchI";
  std::size_t bottleneck = 0;
  std::optional<std::size_t> steps;
  std::optional<double> lr;
  std::optional<std::size_t> snapshot_every;
  std::optional<std::string> init_scale;
  std::optional<double> init_gain;
  tr->add_option("--data", data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
  tr->add_option("--arch", arch_text, "ArchI/ArchII/ArchIII or hidden widths like 6,6,6");
  tr->add_option("--bottleneck", bottleneck, "Width of a linear bottleneck in front of the network (0 = none)");
  tr->add_option("--steps", steps, "Adam steps");
  tr->add_option("--lr", lr, "Learning rate");
  tr->add_option("--snapshot-every", snapshot_every, "Snapshot interval (0 = first and last only)");
  tr->add_option("--init-scale", init_scale, "fan_in or fixed");
  tr->add_option("--init-gain", init_gain, "Gain for fan_in initialization");

  // states
  auto* st = app.add_subcommand("states", "Enumerate network states on a grid around the data");
  std::string model_path;
  std::optional<std::size_t> resolution;
  double expand = 0.25;
  bool refine = true;
  st->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  st->add_option("--data", data_path, "Dataset CSV used to place the grid")->required()->check(CLI::ExistingFile);
  st->add_option("--resolution,--grid-res", resolution, "Points per axis (512 in 2D, 16 behind a bottleneck)");
  st->add_option("--expand", expand, "Grid margin as a fraction of the data box");
  st->add_flag("--refine,!--no-refine", refine, "Bisect sign changes between grid neighbours (default on)");

  // circuit
  auto* ci = app.add_subcommand("circuit", "Build the numeric or logical circuit");
  std::string states_path;
  std::string mode_text = "logical";
  ci->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  ci->add_option("--states", states_path, "states.csv")->required()->check(CLI::ExistingFile);
  ci->add_option("--mode", mode_text, "numeric or logical")->check(CLI::IsMember({"numeric", "logical"}));
  ci->add_option("--out", out_file, "Output file (default <out-dir>/circuit_<mode>.json)");

  // verify
  auto* ve = app.add_subcommand("verify", "Check a circuit against its network; exits 1 on failure");
  std::string circuit_path;
  std::size_t fine_factor = 2;
  ve->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  ve->add_option("--circuit", circuit_path, "Circuit JSON")->required()->check(CLI::ExistingFile);
  ve->add_option("--states", states_path, "states.csv (needed for logical circuits)")->check(CLI::ExistingFile);
  ve->add_option("--data", data_path, "Dataset CSV used to place the grid")->required()->check(CLI::ExistingFile);
  ve->add_option("--resolution,--grid-res", resolution, "Points per axis");
  ve->add_option("--expand", expand, "Grid margin");
  ve->add_option("--fine,--fine-factor", fine_factor, "Refinement of the second logical grid");

  // bounds
  auto* bo = app.add_subcommand("bounds", "VC^Bool, Gamma^Bool and norm bounds of a model or a training run");
  std::string run_dir;
  bo->add_option("--model", model_path, "Model JSON")->check(CLI::ExistingFile);
  bo->add_option("--run-dir,--run", run_dir, "Training run directory (bounds for every snapshot)")
      ->check(CLI::ExistingDirectory);
  bo->add_flag("--states-per-snapshot", "Enumerate boundary states for each snapshot (always on with --run-dir)");
  bo->add_option("--data", data_path, "Training data CSV")->required()->check(CLI::ExistingFile);
  bo->add_option("--resolution,--grid-res", resolution, "Grid points per axis for the boundary states (default 128)");
  bo->add_option("--expand", expand, "Grid margin");

  // plot
  auto* pl = app.add_subcommand("plot", "Render an SVG figure");
  std::string kind = "nsb";
  std::string bounds_path;
  std::string node_text;
  std::string title;
  pl->add_option("--kind", kind, "nsb, bounds or region")->check(CLI::IsMember({"nsb", "bounds", "region"}));
  pl->add_option("--model", model_path, "Model JSON (nsb)")->check(CLI::ExistingFile);
  pl->add_option("--data", data_path, "Dataset CSV (nsb, region)")->check(CLI::ExistingFile);
  pl->add_option("--bounds", bounds_path, "bounds.csv (bounds)")->check(CLI::ExistingFile);
  pl->add_option("--circuit", circuit_path, "Circuit JSON (region)")->check(CLI::ExistingFile);
  pl->add_option("--node", node_text, "Node path like 0.1 (region; default root)");
  pl->add_option("--resolution", resolution, "Contour or raster resolution");
  pl->add_option("--expand", expand, "Plot margin");
  pl->add_option("--title", title, "Figure title");

  // probe
  auto* pr = app.add_subcommand("probe", "MNIST host, circuit, probe arrays and memorization scan");
  const MnistExperimentConfig mdefaults;
  std::string mdir = mdefaults.data_dir.string();
  std::size_t train_size = mdefaults.train_size, test_size = mdefaults.test_size;
  std::size_t validation_size = mdefaults.validation_size, bottleneck_width = mdefaults.arch.bottleneck_width;
  double gap = mdefaults.gap_threshold, true_fraction = mdefaults.prosthetic_true_fraction;
  std::vector<std::string> nodes;
  auto add_mnist = [&](CLI::App* sub) {
    sub->add_option("--mnist", mdir, "Directory with MNIST IDX files")->check(CLI::ExistingDirectory);
    sub->add_option("--train-size", train_size, "Host training samples");
    sub->add_option("--test-size", test_size, "Held-out test samples");
    sub->add_option("--bottleneck", bottleneck_width, "Bottleneck width (2-6)");
    sub->add_option("--arch", arch_text, "Host widths behind the bottleneck (default 9 layers of 6)");
    sub->add_option("--steps", steps, "Host training steps");
    sub->add_option("--gap", gap, "Memorization gap threshold");
  };
  add_mnist(pr);
  pr->add_option("--model", model_path, "Existing host model (skips training)")->check(CLI::ExistingFile);
  pr->add_option("--circuit", circuit_path, "Existing circuit to probe")->check(CLI::ExistingFile);
  std::vector<std::string> probe_data;
  pr->add_option("--data", probe_data, "Labelled CSVs with a digit column (one split each)")->check(CLI::ExistingFile);
  pr->add_option("--node", nodes, "Node paths to probe (default: top-level nodes)");

  // splice
  auto* sp = app.add_subcommand("splice", "Prosthetic splice: the probe flow plus a trained replacement subcircuit");
  std::string replacement_path;
  add_mnist(sp);
  sp->add_option("--validation-size", validation_size, "Validation samples for picking the splice node");
  sp->add_option("--true-fraction", true_fraction, "Share of 5-9 samples in the prosthetic set");
  sp->add_option("--circuit", circuit_path, "Host circuit (direct mode)")->check(CLI::ExistingFile);
  sp->add_option("--prosthetic,--replacement", replacement_path, "Replacement circuit (direct mode)")
      ->check(CLI::ExistingFile);
  sp->add_option("--node", node_text, "Node path to replace (direct mode)");

  // matrix
  auto* mx = app.add_subcommand("matrix", "Run the tier x architecture x seed experiment matrix");
  std::vector<std::string> tiers, arches;
  std::vector<std::uint64_t> seeds;
  bool no_figures = false;
  mx->add_option("--tiers", tiers, "Subset of DataI,DataII,DataIII")->delimiter(',');
  mx->add_option("--arches", arches, "Subset of ArchI,ArchII,ArchIII")->delimiter(',');
  mx->add_option("--seeds", seeds, "Seeds")->delimiter(',');
  mx->add_option("--steps", steps, "Adam steps per cell");
  mx->add_option("--resolution", resolution, "Enumeration grid points per axis");
  mx->add_flag("--no-figures", no_figures, "Skip SVG output");

  CLI11_PARSE(app, argc, argv);

  if (!g.quiet) {
    set_log_sink([](LogLevel level, std::string_view msg) {
      std::cerr << (level == LogLevel::kWarning ? "warning: " : "") << msg << '\n';
    });
  }

  try {
    if (!g.config_path.empty()) g.config = Config::load(g.config_path);
    Timer timer;

    if (*gen) {
      const fs::path dir = out_dir(g, "gen-data");
      Dataset data;
      if (!mnist_dir.empty()) {
        const bool is_train = mnist_split == "train";
        const std::vector<std::string> img = is_train ? std::vector<std::string>{"train-images-idx3-ubyte"}
                                                      : std::vector<std::string>{"t10k-images-idx3-ubyte",
                                                                                 "test-images-idx3-ubyte"};
        const std::vector<std::string> lab = is_train ? std::vector<std::string>{"train-labels-idx1-ubyte"}
                                                      : std::vector<std::string>{"t10k-labels-idx1-ubyte",
                                                                                 "test-labels-idx1-ubyte"};
        data = load_mnist_binary(find_idx_file(mnist_dir, img), find_idx_file(mnist_dir, lab), mnist_size, g.seed);
      } else {
        data = gen_synthetic({parse_tier(tier_text), g.config.get("data.samples_per_class", per_class),
                              g.config.get("data.noise_std", noise), g.seed});
      }
      const fs::path file = out_file.empty() ? dir / "data.csv" : fs::path(out_file);
      write_dataset_csv(data, file);
      std::cout << file << ": " << data.size() << " samples, dim " << data.dim() << '\n';
      write_manifest(dir, "gen-data", g, {{"data", file.string()}, {"samples", data.size()}}, timer.seconds());
      return 0;
    }

    if (*tr) {
      const fs::path dir = out_dir(g, "train");
      const Dataset data = read_dataset_csv(data_path);
      TrainConfig cfg = train_config_from(g.config);
      if (g.seed_set || !g.config.has("train.seed")) cfg.seed = g.seed;
      if (steps) cfg.steps = *steps;
      if (lr) cfg.learning_rate = *lr;
      if (snapshot_every) cfg.snapshot_every = *snapshot_every;
      if (init_scale) cfg.init_scale = parse_init_scale(*init_scale);
      if (init_gain) cfg.init_gain = *init_gain;
      const auto widths = arch_widths(arch_text);
      TrainRun run = bottleneck != 0 ? train_bottleneck(data, ArchSpec{bottleneck, widths}, bottleneck, cfg)
                                     : train(data, ArchSpec{data.dim(), widths}, cfg);
      write_train_run(run, cfg, dir);
      const double acc = accuracy(run.final, data);
      std::cout << "train accuracy " << acc << " after " << cfg.steps << " steps (" << run.restarts
                << " restarts)\n";
      write_manifest(dir, "train", g,
                     {{"model", "model.json"}, {"snapshots", run.snapshots.size()}, {"train_accuracy", acc}},
                     timer.seconds());
      return 0;
    }

    if (*st) {
      const fs::path dir = out_dir(g, "states");
      const Model model = load_model(model_path);
      const Dataset z = circuit_data(model, data_path);
      const std::size_t res = resolution.value_or(default_resolution(model));
      StateRegistry reg;
      if (model.bottleneck) {
        CircuitBuildConfig cb;
        cb.grid_resolution = res;
        cb.grid_expand = expand;
        cb.refine = refine;
        reg = enumerate_model_states(model.mlp, z, cb);
      } else {
        EnumerateOptions eo;
        eo.threads = g.threads;
        const GridSpec grid = grid_around(z, res, expand);
        reg = enumerate_states(model.mlp, grid, eo);
        if (refine) reg = refine_boundary(model.mlp, reg, grid, eo);
      }
      write_states_csv(reg, dir / "states.csv");
      std::cout << reg.size() << " states, " << reg.boundary_count() << " boundary states\n";
      write_manifest(dir, "states", g,
                     {{"states", "states.csv"},
                      {"count", reg.size()},
                      {"boundary", reg.boundary_count()},
                      {"resolution", res},
                      {"expand", expand}},
                     timer.seconds());
      return 0;
    }

    if (*ci) {
      const fs::path dir = out_dir(g, "circuit");
      const Model model = load_model(model_path);
      const StateRegistry reg = read_states_csv(model.mlp.arch, states_path);
      const CircuitTree tree = parse_mode(mode_text) == CircuitMode::kNumeric ? build_numeric_tree(model.mlp, reg)
                                                                              : build_logical_tree(model.mlp, reg);
      const fs::path file = out_file.empty() ? dir / ("circuit_" + mode_text + ".json") : fs::path(out_file);
      save_circuit(tree, file);
      std::cout << file << ": " << tree.node_count() << " nodes, " << tree.leaf_count() << " leaves\n";
      write_manifest(dir, "circuit", g,
                     {{"circuit", file.string()}, {"nodes", tree.node_count()}, {"leaves", tree.leaf_count()}},
                     timer.seconds());
      return 0;
    }

    if (*ve) {
      const fs::path dir = out_dir(g, "verify");
      const Model model = load_model(model_path);
      const CircuitTree tree = load_circuit(circuit_path);
      const Dataset z = circuit_data(model, data_path);
      const GridSpec grid = verify_grid(z, resolution.value_or(default_resolution(model)), expand);
      VerifyOptions vo;
      vo.threads = g.threads;
      EquivalenceReport rep;
      if (tree.mode() == CircuitMode::kNumeric) {
        rep = verify_numeric(model.mlp, tree, grid, vo);
      } else {
        if (states_path.empty()) throw InputError("verifying a logical circuit needs --states");
        rep = verify_logical(model.mlp, tree, read_states_csv(model.mlp.arch, states_path), grid, fine_factor, vo);
      }
      write_report(rep, dir / "report.json");
      std::cout << rep.summary << '\n' << (rep.pass ? "PASS" : "FAIL") << '\n';
      write_manifest(dir, "verify", g, {{"report", "report.json"}, {"pass", rep.pass}}, timer.seconds());
      return rep.pass ? 0 : 1;
    }

    if (*bo) {
      const fs::path dir = out_dir(g, "bounds");
      const Dataset data = read_dataset_csv(data_path);
      const GridSpec grid = grid_around(data, resolution.value_or(128), expand);
      std::vector<BoundRow> rows;
      if (!run_dir.empty()) {
        const TrainRun run = read_train_run(run_dir);
        if (run.snapshots.empty()) throw InputError(run_dir + " has no snapshots");
        if (run.snapshots.front().model.bottleneck) throw InputError("bounds are computed for 2D models only");
        rows = bound_series(run, data, grid, g.threads);
      } else {
        if (model_path.empty()) throw InputError("bounds needs --model or --run");
        const Model model = load_model(model_path);
        if (model.bottleneck) throw InputError("bounds are computed for 2D models only");
        rows.push_back(bound_row(model.mlp, data, grid, g.threads));
      }
      write_bounds_csv(rows, dir / "bounds.csv");
      const BoundRow& last = rows.back();
      std::printf("step %zu: |S0| %zu  VC^Bool %.4g  Gamma^Bool %.4g  margin %.4g  frobenius %.4g  spec-l12 %.4g  "
                  "spec-fro %.4g\n",
                  last.step, last.boundary_states, last.vc_bool, last.gamma_bool, last.gamma, last.norms.frobenius,
                  last.norms.spec_l12, last.norms.spec_fro);
      write_manifest(dir, "bounds", g, {{"bounds", "bounds.csv"}, {"rows", rows.size()}}, timer.seconds());
      return 0;
    }

    if (*pl) {
      const fs::path dir = out_dir(g, "plot");
      Figure fig;
      if (kind == "nsb") {
        if (model_path.empty() || data_path.empty()) throw InputError("nsb plots need --model and --data");
        const Model model = load_model(model_path);
        const Dataset data = read_dataset_csv(data_path);
        fig = nsb_figure(model.mlp, grid_around(data, resolution.value_or(200), expand), &data, title);
      } else if (kind == "bounds") {
        if (bounds_path.empty()) throw InputError("bound plots need --bounds");
        fig = bound_series_figure(read_bounds_csv(bounds_path), title);
      } else {
        if (circuit_path.empty() || data_path.empty()) throw InputError("region plots need --circuit and --data");
        const CircuitTree tree = load_circuit(circuit_path);
        const Dataset data = read_dataset_csv(data_path);
        const NodePath path = node_text.empty() ? NodePath{} : parse_node_path(node_text);
        fig = region_figure(tree, path, grid_around(data, 2, expand), resolution.value_or(120),
                            title.empty() ? "node " + to_string(path) : title);
      }
      const fs::path file = dir / (kind + ".svg");
      write_svg(fig, file);
      std::cout << file << '\n';
      write_manifest(dir, "plot", g, {{"figure", file.filename().string()}}, timer.seconds());
      return 0;
    }

    // The config file is the base; flags given on the command line win.
    auto mnist_config = [&](CLI::App* sub, bool splice) {
      MnistExperimentConfig c = MnistExperimentConfig::from_config(g.config);
      const auto given = [&](const char* name) { return sub->count(name) > 0; };
      if (given("--mnist")) c.data_dir = mdir;
      if (given("--train-size")) c.train_size = train_size;
      if (given("--test-size")) c.test_size = test_size;
      if (given("--validation-size")) c.validation_size = validation_size;
      if (given("--bottleneck")) c.arch.bottleneck_width = bottleneck_width;
      if (given("--arch")) c.arch.base.hidden_widths = arch_widths(arch_text);
      if (given("--steps")) c.host_train.steps = *steps;
      if (given("--gap")) c.gap_threshold = gap;
      if (given("--true-fraction")) c.prosthetic_true_fraction = true_fraction;
      if (g.seed_set || !g.config.has("mnist.seed")) c.seed = g.seed;
      c.arch.base.input_dim = c.arch.bottleneck_width;
      if (c.prosthetic_base) c.prosthetic_base->input_dim = c.arch.bottleneck_width;
      c.splice = splice;
      return c;
    };

    if (*pr) {
      const fs::path dir = out_dir(g, "probe");
      if (!circuit_path.empty()) {
        const CircuitTree tree = load_circuit(circuit_path);
        std::optional<Model> host;
        if (!model_path.empty()) host = load_model(model_path);
        std::vector<std::pair<std::string, Dataset>> splits;
        if (!probe_data.empty()) {
          for (const auto& f : probe_data) {
            const Dataset d = read_dataset_csv(f);
            splits.emplace_back(fs::path(f).stem().string(), host ? to_circuit_coordinates(*host, d) : d);
          }
        } else {
          if (!host) throw InputError("probing MNIST splits needs the host --model");
          const MnistSplits ms = load_mnist_splits(mdir, train_size, 0, test_size, g.seed);
          splits.emplace_back("train", to_circuit_coordinates(*host, ms.train));
          splits.emplace_back("test", to_circuit_coordinates(*host, ms.test));
        }
        std::vector<NodePath> paths;
        for (const auto& n : nodes) paths.push_back(parse_node_path(n));
        if (paths.empty()) paths = top_level_paths(tree);
        std::vector<ProbeArray> probes;
        for (const auto& p : paths) {
          for (const auto& [name, d] : splits) probes.push_back(probe_node(tree, p, d, name));
        }
        write_probe_csv(probes, dir / "probes.csv");
        write_svg(probe_figure(probes, "probe arrays"), dir / "probes.svg");
        std::size_t flagged = 0;
        if (splits.size() >= 2) {
          const auto flags = diagnose_memorization(tree, splits[0].second, splits[1].second, gap);
          flagged = flags.size();
          for (const auto& f : flags) {
            std::printf("node %s digit %zu: %s %.3f %s %.3f\n", to_string(f.path).c_str(), f.digit,
                        splits[0].first.c_str(), f.train_fraction, splits[1].first.c_str(), f.test_fraction);
          }
        }
        write_manifest(dir, "probe", g, {{"probes", "probes.csv"}, {"figure", "probes.svg"}, {"flags", flagged}},
                       timer.seconds());
        return 0;
      }
      const MnistExperimentResult r = run_mnist_experiment(mnist_config(pr, false), dir);
      std::printf("host train %.4f test %.4f; circuit %zu leaves; sign agreement %.4f on %zu enumerated test samples\n",
                  r.host_train_accuracy, r.host_test_accuracy, r.leaves, r.sign_agreement(), r.enumerated_test);
      for (const auto& f : r.flags) {
        std::printf("node %s digit %zu: train %.3f test %.3f\n", to_string(f.path).c_str(), f.digit, f.train_fraction,
                    f.test_fraction);
      }
      return 0;
    }

    if (*sp) {
      const fs::path dir = out_dir(g, "splice");
      if (!replacement_path.empty()) {
        if (circuit_path.empty()) throw InputError("--replacement needs --circuit");
        const CircuitTree out =
            splice(load_circuit(circuit_path), parse_node_path(node_text), load_circuit(replacement_path));
        save_circuit(out, dir / "circuit_spliced.json");
        std::cout << dir / "circuit_spliced.json" << ": " << out.leaf_count() << " leaves\n";
        write_manifest(dir, "splice", g, {{"circuit", "circuit_spliced.json"}}, timer.seconds());
        return 0;
      }
      const MnistExperimentResult r = run_mnist_experiment(mnist_config(sp, true), dir);
      std::printf("host train %.4f test %.4f; %zu flags\n", r.host_train_accuracy, r.host_test_accuracy,
                  r.flags.size());
      if (!r.prosthetic) {
        std::printf("no splice: %s\n", r.prosthetic_error.c_str());
        return 1;
      }
      std::printf("spliced at %s: train %.4f -> %.4f, test %.4f -> %.4f\n", to_string(r.prosthetic->path).c_str(),
                  r.prosthetic->train_before, r.prosthetic->train_after, r.prosthetic->test_before,
                  r.prosthetic->test_after);
      return 0;
    }

    if (*mx) {
      const fs::path dir = out_dir(g, "matrix");
      ExperimentMatrixConfig cfg = ExperimentMatrixConfig::from_config(g.config);
      if (!tiers.empty()) {
        cfg.tiers.clear();
        for (const auto& t : tiers) cfg.tiers.push_back(parse_tier(t));
      }
      if (!arches.empty()) {
        std::vector<ArchPreset> keep;
        for (const auto& a : arches) {
          const auto it = std::find_if(cfg.arches.begin(), cfg.arches.end(), [&](const auto& p) { return p.name == a; });
          if (it == cfg.arches.end()) throw InputError("unknown architecture '" + a + "'");
          keep.push_back(*it);
        }
        cfg.arches = keep;
      }
      if (!seeds.empty()) {
        cfg.seeds = seeds;
      } else if (g.seed_set) {
        cfg.seeds = {g.seed};
      }
      if (steps) cfg.train.steps = *steps;
      if (resolution) cfg.grid_resolution = *resolution;
      if (no_figures) cfg.figures = false;
      if (g.threads != 0) cfg.threads = g.threads;
      const MatrixResult res = run_experiment_matrix(cfg, dir);
      std::cout << std::ifstream(dir / "summary.md").rdbuf() << '\n';
      std::size_t verified = 0;
      for (const auto& c : res.cells) verified += c.verified();
      std::printf("%zu/%zu cells verified in %.1f s\n", verified, res.cells.size(), timer.seconds());
      write_manifest(dir, "matrix", g, {{"summary", "summary.md"}, {"verified", verified}}, timer.seconds());
      return res.all_verified() ? 0 : 1;
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
