#include "relucirc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "json_util.hpp"
#include "relucirc/circuit_eval.hpp"
#include "relucirc/circuit_io.hpp"
#include "relucirc/error.hpp"
#include "relucirc/figures.hpp"
#include "relucirc/interpret.hpp"
#include "relucirc/log.hpp"
#include "relucirc/mnist.hpp"
#include "relucirc/model_io.hpp"
#include "relucirc/registry.hpp"

namespace relucirc {

namespace {

using detail::json;

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::size_t> parse_widths(const std::string& key, const std::vector<std::string>& items) {
  std::vector<std::size_t> out;
  for (const auto& item : items) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v == 0) throw InputError("config key '" + key + "': bad width '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string cell_name(Tier tier, const std::string& arch, std::uint64_t seed) {
  return tier_name(tier) + "_" + arch + "_s" + std::to_string(seed);
}

json bounds_json(const NormBounds& n) {
  return json{{"frobenius", fmt(n.frobenius)}, {"spec_l12", fmt(n.spec_l12)}, {"spec_fro", fmt(n.spec_fro)}};
}

json cell_json(const CellResult& c) {
  json j{{"tier", tier_name(c.tier)},
         {"arch", c.arch},
         {"seed", c.seed},
         {"status", c.status},
         {"samples", c.samples},
         {"train_accuracy", c.train_accuracy},
         {"restarts", c.restarts},
         {"states", c.states},
         {"boundary_states", c.boundary_states},
         {"ranks", c.description.ranks},
         {"retained_layers", c.description.retained_layers},
         {"k", c.description.k},
         {"s", c.description.s},
         {"degree", c.description.degree},
         {"vc_bool", fmt(c.vc_bool)},
         {"vc_nodata", fmt(c.vc_nodata)},
         {"gamma", fmt(c.gamma)},
         {"gamma_bool", fmt(c.gamma_bool)},
         {"norm_bounds", bounds_json(c.norms)},
         {"numeric_leaves", c.numeric_leaves},
         {"logical_leaves", c.logical_leaves},
         {"numeric_pass", c.numeric.pass},
         {"numeric_summary", c.numeric.summary},
         {"logical_pass", c.logical.pass},
         {"logical_summary", c.logical.summary}};
  return j;
}

void write_cell_figures(const ExperimentMatrixConfig& cfg, const CellResult& cell, const Dataset& data,
                        const TrainRun& run, const CircuitTree& logical, const std::filesystem::path& dir) {
  const std::string title = tier_name(cell.tier) + " / " + cell.arch + " / seed " + std::to_string(cell.seed);
  const GridSpec box = grid_around(data, cfg.nsb_resolution, cfg.grid_expand);
  write_svg(nsb_figure(run.final.mlp, box, &data, title), dir / "nsb.svg");
  write_svg(nsb_figure(run.snapshots.front().model.mlp, box, &data, title + " (initial)"), dir / "nsb_initial.svg");
  if (!cell.series.empty()) write_svg(bound_series_figure(cell.series, title), dir / "bounds.svg");

  write_svg(region_figure(logical, {}, box, cfg.region_raster, title + " root"), dir / "regions" / "root.svg");
  for (const NodePath& p : top_level_paths(logical)) {
    const std::string name = to_string(p);
    write_svg(region_figure(logical, p, box, cfg.region_raster, title + " node " + name),
              dir / "regions" / ("node_" + name + ".svg"));
  }
}

}  // namespace

std::vector<ArchPreset> default_arch_presets() {
  return {{"ArchI", {6, 6, 6}}, {"ArchII", {6, 6, 6, 6, 6, 6}}, {"ArchIII", {6, 6, 6, 6, 6, 6, 6, 6, 6}}};
}

void ExperimentMatrixConfig::validate() const {
  if (tiers.empty()) throw InputError("experiment matrix needs at least one tier");
  if (arches.empty()) throw InputError("experiment matrix needs at least one architecture");
  if (seeds.empty()) throw InputError("experiment matrix needs at least one seed");
  if (samples_per_class == 0) throw InputError("samples_per_class must be positive");
  if (grid_resolution < 2 || series_resolution < 2 || nsb_resolution < 2 || region_raster < 1) {
    throw InputError("grid resolutions must be at least 2");
  }
  if (fine_factor < 1) throw InputError("fine_factor must be at least 1");
  train.validate();
  for (const auto& a : arches) {
    if (a.name.empty()) throw InputError("architecture presets need names");
    a.spec().validate();
  }
  std::vector<const ArchPreset*> by_depth;
  for (const auto& a : arches) by_depth.push_back(&a);
  std::stable_sort(by_depth.begin(), by_depth.end(), [](const ArchPreset* a, const ArchPreset* b) {
    return a->hidden_widths.size() < b->hidden_widths.size();
  });
  for (std::size_t i = 1; i < by_depth.size(); ++i) {
    const auto& small = by_depth[i - 1]->hidden_widths;
    const auto& big = by_depth[i]->hidden_widths;
    if (!std::equal(small.begin(), small.end(), big.begin())) {
      throw InputError("architectures " + by_depth[i - 1]->name + " and " + by_depth[i]->name +
                       " are not nested by prefix");
    }
  }
}

TrainConfig train_config_from(const Config& config, TrainConfig t) {
  t.learning_rate = config.get("train.learning_rate", t.learning_rate);
  t.beta1 = config.get("train.beta1", t.beta1);
  t.beta2 = config.get("train.beta2", t.beta2);
  t.epsilon = config.get("train.epsilon", t.epsilon);
  t.steps = config.get("train.steps", t.steps);
  t.batch_size = config.get("train.batch_size", t.batch_size);
  t.seed = config.get_u64("train.seed", t.seed);
  t.init_std = config.get("train.init_std", t.init_std);
  if (const auto s = config.raw("train.init_scale")) t.init_scale = parse_init_scale(*s);
  t.init_gain = config.get("train.init_gain", t.init_gain);
  t.snapshot_every = config.get("train.snapshot_every", t.snapshot_every);
  t.stall_steps = config.get("train.stall_steps", t.stall_steps);
  t.max_restarts = config.get("train.max_restarts", t.max_restarts);
  return t;
}

ExperimentMatrixConfig ExperimentMatrixConfig::from_config(const Config& config) {
  static const std::vector<std::string> known = {
      "matrix.tiers", "matrix.arches", "matrix.seeds", "matrix.threads", "matrix.figures",
      "matrix.numeric_circuit", "data.samples_per_class", "data.noise_std", "train.learning_rate",
      "train.beta1", "train.beta2", "train.epsilon", "train.steps", "train.batch_size", "train.seed",
      "train.init_std", "train.init_scale", "train.init_gain", "train.snapshot_every", "train.stall_steps",
      "train.max_restarts", "grid.resolution", "grid.expand", "grid.series_resolution", "grid.nsb_resolution",
      "grid.region_raster", "verify.numeric_tolerance", "verify.fine_factor", "verify.fine_min_agreement",
      "verify.boundary_epsilon", "verify.max_logged"};
  static const std::vector<std::string> owned = {"matrix.", "data.", "train.", "grid.", "verify."};
  for (const auto& [key, value] : config.values()) {
    const bool ours = std::any_of(owned.begin(), owned.end(), [&](const auto& p) { return key.rfind(p, 0) == 0; });
    if (ours && std::find(known.begin(), known.end(), key) == known.end()) {
      throw InputError("unknown config key '" + key + "'");
    }
  }

  ExperimentMatrixConfig c;
  if (const auto tiers = config.get_list("matrix.tiers", {}); !tiers.empty()) {
    c.tiers.clear();
    for (const auto& t : tiers) c.tiers.push_back(parse_tier(t));
  }
  std::vector<ArchPreset> presets = default_arch_presets();
  for (const auto& [key, value] : config.values()) {
    if (key.rfind("arch.", 0) != 0) continue;
    const std::string name = key.substr(5);
    ArchPreset p{name, parse_widths(key, config.get_list(key, {}))};
    const auto it = std::find_if(presets.begin(), presets.end(), [&](const auto& q) { return q.name == name; });
    if (it != presets.end()) {
      *it = p;
    } else {
      presets.push_back(p);
    }
  }
  if (const auto names = config.get_list("matrix.arches", {}); !names.empty()) {
    c.arches.clear();
    for (const auto& n : names) {
      const auto it = std::find_if(presets.begin(), presets.end(), [&](const auto& q) { return q.name == n; });
      if (it == presets.end()) throw InputError("unknown architecture '" + n + "' in matrix.arches");
      c.arches.push_back(*it);
    }
  } else {
    c.arches = presets;
  }
  if (const auto seeds = config.get_list("matrix.seeds", {}); !seeds.empty()) {
    c.seeds.clear();
    for (const auto& s : seeds) {
      std::uint64_t v = 0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) throw InputError("matrix.seeds: bad seed '" + s + "'");
      c.seeds.push_back(v);
    }
  }
  c.threads = config.get("matrix.threads", c.threads);
  c.figures = config.get("matrix.figures", c.figures);
  c.write_numeric_circuit = config.get("matrix.numeric_circuit", c.write_numeric_circuit);
  c.samples_per_class = config.get("data.samples_per_class", c.samples_per_class);
  c.noise_std = config.get("data.noise_std", c.noise_std);
  c.train = train_config_from(config, c.train);
  c.grid_resolution = config.get("grid.resolution", c.grid_resolution);
  c.grid_expand = config.get("grid.expand", c.grid_expand);
  c.series_resolution = config.get("grid.series_resolution", c.series_resolution);
  c.nsb_resolution = config.get("grid.nsb_resolution", c.nsb_resolution);
  c.region_raster = config.get("grid.region_raster", c.region_raster);
  c.verify.numeric_tolerance = config.get("verify.numeric_tolerance", c.verify.numeric_tolerance);
  c.verify.fine_min_agreement = config.get("verify.fine_min_agreement", c.verify.fine_min_agreement);
  c.verify.boundary_epsilon = config.get("verify.boundary_epsilon", c.verify.boundary_epsilon);
  c.verify.max_logged = config.get("verify.max_logged", c.verify.max_logged);
  c.fine_factor = config.get("verify.fine_factor", c.fine_factor);
  c.validate();
  return c;
}

BoundRow bound_row(const MlpParams& params, const Dataset& data, const GridSpec& grid, std::size_t threads) {
  EnumerateOptions eo;
  eo.threads = threads;
  StateRegistry reg = enumerate_states(params, grid, eo);
  reg = refine_boundary(params, reg, grid, eo);
  const auto sigma0 = reg.sigma_zero();
  BoundRow row;
  row.states = reg.size();
  row.boundary_states = sigma0.size();
  row.train_accuracy = accuracy(params, data);
  row.vc_bool = vc_bool(minimal_description(sigma0, params.arch));
  row.gamma = margin(params, data);
  row.gamma_bool = gamma_bool(row.vc_bool, data.size());
  row.norms = norm_bounds(params, data.size(), row.gamma);
  return row;
}

std::vector<BoundRow> bound_series(const TrainRun& run, const Dataset& data, const GridSpec& grid,
                                   std::size_t threads) {
  std::vector<BoundRow> rows;
  rows.reserve(run.snapshots.size());
  for (const Snapshot& s : run.snapshots) {
    BoundRow r = bound_row(s.model.mlp, data, grid, threads);
    r.step = s.step;
    rows.push_back(r);
  }
  return rows;
}

CellResult run_cell(const ExperimentMatrixConfig& cfg, Tier tier, const ArchPreset& arch, std::uint64_t seed,
                    const std::filesystem::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  CellResult cell;
  cell.tier = tier;
  cell.arch = arch.name;
  cell.seed = seed;
  cell.dir = dir;
  const std::string name = cell_name(tier, arch.name, seed);
  std::string stage = "data";
  try {
    std::filesystem::create_directories(dir);
    const Dataset data = gen_synthetic({tier, cfg.samples_per_class, cfg.noise_std, seed});
    write_dataset_csv(data, dir / "data.csv");
    cell.samples = data.size();

    stage = "train";
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    const ArchSpec spec = arch.spec();
    const TrainRun run = train(data, spec, tc);
    write_train_run(run, tc, dir / "train");
    const MlpParams& params = run.final.mlp;
    cell.train_accuracy = accuracy(params, data);
    cell.restarts = run.restarts;
    log_info(name + ": trained, accuracy " + fmt(cell.train_accuracy));

    stage = "states";
    EnumerateOptions eo;
    eo.threads = cfg.verify.threads;
    const GridSpec grid = grid_around(data, cfg.grid_resolution, cfg.grid_expand);
    StateRegistry reg = enumerate_states(params, grid, eo);
    reg = refine_boundary(params, reg, grid, eo);
    write_states_csv(reg, dir / "states.csv");
    cell.states = reg.size();
    cell.boundary_states = reg.boundary_count();

    stage = "numeric circuit";
    {
      const CircuitTree numeric = build_numeric_tree(params, reg);
      cell.numeric_leaves = numeric.leaf_count();
      cell.numeric = verify_numeric(params, numeric, grid, cfg.verify);
      write_report(cell.numeric, dir / "verify_numeric.json");
      if (cfg.write_numeric_circuit) save_circuit(numeric, dir / "circuit_numeric.json");
    }

    stage = "logical circuit";
    const CircuitTree logical = build_logical_tree(params, reg);
    cell.logical_leaves = logical.leaf_count();
    cell.logical = verify_logical(params, logical, reg, grid, cfg.fine_factor, cfg.verify);
    write_report(cell.logical, dir / "verify_logical.json");
    save_circuit(logical, dir / "circuit_logical.json");
    log_info(name + ": " + cell.numeric.summary + "; " + cell.logical.summary);

    stage = "capacity";
    cell.description = minimal_description(reg.sigma_zero(), spec);
    cell.vc_bool = vc_bool(cell.description);
    cell.vc_nodata = vc_nodata(spec);
    cell.gamma = margin(params, data);
    cell.gamma_bool = gamma_bool(cell.vc_bool, data.size());
    cell.norms = norm_bounds(params, data.size(), cell.gamma);

    stage = "bound series";
    const GridSpec coarse = grid_around(data, cfg.series_resolution, cfg.grid_expand);
    cell.series = bound_series(run, data, coarse, cfg.verify.threads);
    write_bounds_csv(cell.series, dir / "bounds.csv");

    if (cfg.figures) {
      stage = "figures";
      write_cell_figures(cfg, cell, data, run, logical, dir / "figures");
    }
  } catch (const std::exception& e) {
    cell.status = stage + ": " + e.what();
    log_warning(name + " failed at " + cell.status);
  }
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    detail::write_json_file(dir / "cell.json", cell_json(cell));
  } catch (const std::exception& e) {
    log_warning(name + ": " + e.what());
  }
  return cell;
}

bool MatrixResult::all_verified() const {
  return !cells.empty() && std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.verified(); });
}

const CellResult* MatrixResult::find(Tier tier, const std::string& arch, std::uint64_t seed) const {
  for (const auto& c : cells) {
    if (c.tier == tier && c.arch == arch && c.seed == seed) return &c;
  }
  return nullptr;
}

void write_summary(const MatrixResult& result, const ExperimentMatrixConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "summary.csv");
    if (!csv) throw InputError("cannot write " + (dir / "summary.csv").string());
    csv << "tier,arch,seed,status,train_acc,restarts,states,boundary_states,k,s,degree,vc_bool,vc_nodata,gamma,"
           "gamma_bool,frobenius,spec_l12,spec_fro,numeric_leaves,logical_leaves,numeric_pass,"
           "numeric_max_diff,logical_pass,logical_agreement,fine_agreement\n";
    for (const auto& c : result.cells) {
      std::string status = c.ok() ? "ok" : "failed";
      csv << tier_name(c.tier) << ',' << c.arch << ',' << c.seed << ',' << status << ',' << fmt(c.train_accuracy)
          << ',' << c.restarts << ',' << c.states << ',' << c.boundary_states << ',' << c.description.k << ','
          << c.description.s << ',' << c.description.degree << ',' << fmt(c.vc_bool) << ',' << fmt(c.vc_nodata)
          << ',' << fmt(c.gamma) << ',' << fmt(c.gamma_bool) << ',' << fmt(c.norms.frobenius) << ','
          << fmt(c.norms.spec_l12) << ',' << fmt(c.norms.spec_fro) << ',' << c.numeric_leaves << ','
          << c.logical_leaves << ',' << (c.numeric.pass ? 1 : 0) << ',' << fmt(c.numeric.max_abs_diff_guaranteed)
          << ',' << (c.logical.pass ? 1 : 0) << ',' << fmt(c.logical.agreement) << ','
          << fmt(c.logical.fine_agreement) << '\n';
    }
  }

  std::ofstream md(dir / "summary.md");
  if (!md) throw InputError("cannot write " + (dir / "summary.md").string());
  md << "# Capacity summary\n\nEntries are VC^Bool(|Sigma_0|)[|Sigma_bar|].\n";
  for (std::uint64_t seed : cfg.seeds) {
    md << "\n## seed " << seed << "\n\n| |";
    for (const auto& a : cfg.arches) md << ' ' << a.name << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < cfg.arches.size(); ++i) md << "---|";
    md << '\n';
    for (Tier t : cfg.tiers) {
      md << "| " << tier_name(t) << " |";
      for (const auto& a : cfg.arches) {
        const CellResult* c = result.find(t, a.name, seed);
        if (c == nullptr || !c->ok()) {
          md << " failed |";
          continue;
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, " %.1f(%zu)[%zu]%s |", c->vc_bool, c->boundary_states, c->states,
                      c->verified() ? "" : " unverified");
        md << buf;
      }
      md << '\n';
    }
  }
  md << "\n| | params | VC^NoData |\n|---|---|---|\n";
  for (const auto& a : cfg.arches) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "| %s | %zu | %.1f |\n", a.name.c_str(), a.spec().parameter_count(),
                  vc_nodata(a.spec()));
    md << buf;
  }
  const auto failed = std::count_if(result.cells.begin(), result.cells.end(), [](const auto& c) { return !c.ok(); });
  if (failed > 0) {
    md << "\n## failures\n\n";
    for (const auto& c : result.cells) {
      if (!c.ok()) md << "- " << cell_name(c.tier, c.arch, c.seed) << ": " << c.status << '\n';
    }
  }
}

MatrixResult run_experiment_matrix(const ExperimentMatrixConfig& cfg_in, const std::filesystem::path& dir) {
  cfg_in.validate();
  const auto t0 = std::chrono::steady_clock::now();
  struct Job {
    Tier tier;
    const ArchPreset* arch;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (Tier t : cfg_in.tiers) {
    for (const auto& a : cfg_in.arches) {
      for (std::uint64_t s : cfg_in.seeds) jobs.push_back({t, &a, s});
    }
  }

  std::size_t workers = cfg_in.threads != 0 ? cfg_in.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs.size());
  ExperimentMatrixConfig cfg = cfg_in;
  if (workers > 1) cfg.verify.threads = 1;

  MatrixResult result;
  result.dir = dir;
  result.cells.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      result.cells[i] = run_cell(cfg, j.tier, *j.arch, j.seed, dir / cell_name(j.tier, j.arch->name, j.seed));
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  write_summary(result, cfg_in, dir);

  if (cfg_in.figures) {
    std::vector<std::string> names;
    for (const auto& a : cfg_in.arches) names.push_back(a.name);
    const std::uint64_t seed = cfg_in.seeds.front();
    std::vector<NamedSeries> vc, s0;
    for (Tier t : cfg_in.tiers) {
      NamedSeries v{tier_name(t), {}}, b{tier_name(t), {}};
      for (const auto& a : cfg_in.arches) {
        const CellResult* c = result.find(t, a.name, seed);
        const bool ok = c != nullptr && c->ok();
        v.values.push_back(ok ? c->vc_bool : std::nan(""));
        b.values.push_back(ok ? static_cast<double>(c->boundary_states) : std::nan(""));
      }
      vc.push_back(std::move(v));
      s0.push_back(std::move(b));
    }
    NamedSeries nd{"VC NoData", {}};
    for (const auto& a : cfg_in.arches) nd.values.push_back(vc_nodata(a.spec()));
    vc.push_back(std::move(nd));
    write_svg(by_architecture_figure(names, vc, "VC bound", "VC Bool by architecture, seed " + std::to_string(seed)),
              dir / "vc_by_arch.svg");
    write_svg(by_architecture_figure(names, s0, "boundary states",
                                     "boundary states by architecture, seed " + std::to_string(seed)),
              dir / "boundary_states_by_arch.svg");
  }

  json cells = json::array();
  for (const auto& c : result.cells) {
    cells.push_back({{"cell", cell_name(c.tier, c.arch, c.seed)},
                     {"dir", std::filesystem::relative(c.dir, dir).generic_string()},
                     {"status", c.status},
                     {"verified", c.verified()},
                     {"seconds", c.seconds}});
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::write_json_file(dir / "manifest.json", json{{"kind", "experiment-matrix"},
                                                      {"cells", std::move(cells)},
                                                      {"workers", workers},
                                                      {"seconds", seconds},
                                                      {"all_verified", result.all_verified()},
                                                      {"summary", {"summary.csv", "summary.md"}}});
  return result;
}

void MnistExperimentConfig::validate() const {
  arch.validate();
  host_train.validate();
  if (train_size == 0 || test_size == 0) throw InputError("MNIST train and test splits must not be empty");
  if (!(gap_threshold > 0.0 && gap_threshold <= 1.0)) throw InputError("gap_threshold must lie in (0,1]");
  if (!(prosthetic_true_fraction > 0.0 && prosthetic_true_fraction <= 1.0)) {
    throw InputError("prosthetic true fraction must lie in (0,1]");
  }
  if (splice && validation_size == 0) throw InputError("splicing needs a validation split");
  if (prosthetic_base) prosthetic_base->validate();
  if (prosthetic_train) prosthetic_train->validate();
}

MnistExperimentConfig MnistExperimentConfig::from_config(const Config& config) {
  static const std::vector<std::string> known = {
      "mnist.data_dir", "mnist.train_size", "mnist.validation_size", "mnist.test_size", "mnist.seed",
      "mnist.bottleneck", "mnist.base", "mnist.gap_threshold", "mnist.scan_depth", "mnist.grid_resolution",
      "mnist.grid_expand", "mnist.true_fraction", "mnist.prosthetic_widths", "mnist.prosthetic_steps",
      "mnist.min_prosthetic_accuracy", "mnist.splice", "mnist.figures"};
  for (const auto& [key, value] : config.values()) {
    if (key.rfind("mnist.", 0) == 0 && std::find(known.begin(), known.end(), key) == known.end()) {
      throw InputError("unknown config key '" + key + "'");
    }
  }
  MnistExperimentConfig c;
  c.data_dir = config.get("mnist.data_dir", c.data_dir.string());
  c.train_size = config.get("mnist.train_size", c.train_size);
  c.validation_size = config.get("mnist.validation_size", c.validation_size);
  c.test_size = config.get("mnist.test_size", c.test_size);
  c.seed = config.get_u64("mnist.seed", c.seed);
  c.arch.bottleneck_width = config.get("mnist.bottleneck", c.arch.bottleneck_width);
  if (config.has("mnist.base")) c.arch.base.hidden_widths = parse_widths("mnist.base", config.get_list("mnist.base", {}));
  c.arch.base.input_dim = c.arch.bottleneck_width;
  c.host_train = train_config_from(config, c.host_train);
  c.gap_threshold = config.get("mnist.gap_threshold", c.gap_threshold);
  c.scan_depth = config.get("mnist.scan_depth", c.scan_depth);
  c.circuit.grid_resolution = config.get("mnist.grid_resolution", c.circuit.grid_resolution);
  c.circuit.grid_expand = config.get("mnist.grid_expand", c.circuit.grid_expand);
  c.prosthetic_true_fraction = config.get("mnist.true_fraction", c.prosthetic_true_fraction);
  if (config.has("mnist.prosthetic_widths")) {
    c.prosthetic_base =
        ArchSpec{c.arch.bottleneck_width, parse_widths("mnist.prosthetic_widths", config.get_list("mnist.prosthetic_widths", {}))};
  }
  if (config.has("mnist.prosthetic_steps")) {
    TrainConfig t = c.host_train;
    t.steps = config.get("mnist.prosthetic_steps", t.steps);
    c.prosthetic_train = t;
  }
  c.prosthetic_min_accuracy = config.get("mnist.min_prosthetic_accuracy", c.prosthetic_min_accuracy);
  c.splice = config.get("mnist.splice", c.splice);
  c.figures = config.get("mnist.figures", c.figures);
  c.validate();
  return c;
}

MnistExperimentResult run_mnist_experiment(const MnistExperimentConfig& cfg, const std::filesystem::path& dir) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(dir);
  const MnistSplits splits =
      load_mnist_splits(cfg.data_dir, cfg.train_size, cfg.splice ? cfg.validation_size : 0, cfg.test_size, cfg.seed);

  MnistExperimentResult r;
  TrainConfig tc = cfg.host_train;
  tc.seed = cfg.seed;
  const TrainRun run = train_bottleneck(splits.train, cfg.arch.base, cfg.arch.bottleneck_width, tc);
  write_train_run(run, tc, dir / "host");
  r.host = run.final;
  r.host_train_accuracy = accuracy(r.host, splits.train);
  r.host_test_accuracy = accuracy(r.host, splits.test);
  log_info("host accuracy train " + fmt(r.host_train_accuracy) + " test " + fmt(r.host_test_accuracy));

  const Dataset trz = to_circuit_coordinates(r.host, splits.train);
  const Dataset tez = to_circuit_coordinates(r.host, splits.test);
  const StateRegistry reg = enumerate_model_states(r.host.mlp, trz, cfg.circuit);
  write_states_csv(reg, dir / "states.csv");
  const CircuitTree tree = build_logical_tree(r.host.mlp, reg, cfg.circuit.build);
  save_circuit(tree, dir / "circuit_logical.json");
  r.states = reg.size();
  r.boundary_states = reg.boundary_count();
  r.leaves = tree.leaf_count();
  r.circuit_train_accuracy = circuit_accuracy(tree, trz);
  r.circuit_test_accuracy = circuit_accuracy(tree, tez);

  {
    TreeEvaluator te(tree);
    const std::vector<std::uint8_t> out = te.logical_batch(tez.points);
    Evaluator ev(r.host.mlp);
    NetworkState state;
    for (std::size_t i = 0; i < tez.size(); ++i) {
      const double n = ev.evaluate(tez.point(i), &state);
      if (!reg.contains(state)) continue;
      ++r.enumerated_test;
      r.agreeing_test += (out[i] != 0) == (n >= 0.0);
    }
  }

  std::vector<ProbeArray> probes;
  for (const NodePath& p : top_level_paths(tree)) {
    probes.push_back(probe_node(tree, p, trz, "train"));
    probes.push_back(probe_node(tree, p, tez, "test"));
  }
  write_probe_csv(probes, dir / "probes.csv");
  if (cfg.figures) write_svg(probe_figure(probes, "top-level nodes"), dir / "figures" / "probes.svg");

  r.flags = diagnose_memorization(tree, trz, tez, cfg.gap_threshold, cfg.scan_depth);
  r.candidates = splice_candidates(tree, r.flags);
  json flags = json::array();
  for (const auto& f : r.flags) {
    flags.push_back({{"node", to_string(f.path)},
                     {"digit", f.digit},
                     {"train_fraction", f.train_fraction},
                     {"test_fraction", f.test_fraction}});
  }
  detail::write_json_file(dir / "flags.json", flags);

  json splice_json = nullptr;
  if (cfg.splice) {
    ProstheticConfig pc;
    pc.base = cfg.prosthetic_base.value_or(cfg.arch.base);
    pc.train = cfg.prosthetic_train.value_or(tc);
    pc.train.seed = cfg.seed;
    pc.min_train_accuracy = cfg.prosthetic_min_accuracy;
    pc.circuit = cfg.circuit;
    try {
      const Dataset pdata = subsample_prosthetic(splits.train, cfg.seed, cfg.prosthetic_true_fraction);
      ProstheticReport rep = prosthetic_workflow(r.host, tree, r.candidates, pdata, splits.train,
                                                 splits.validation, splits.test, pc);
      save_model(rep.prosthetic, ModelMetadata{cfg.seed, {}}, dir / "prosthetic" / "model.json");
      save_circuit(rep.prosthetic_tree, dir / "prosthetic" / "circuit_logical.json");
      save_circuit(rep.tree, dir / "circuit_spliced.json");
      json cands = json::array();
      for (const auto& c : rep.candidates) {
        cands.push_back({{"node", to_string(c.path)}, {"validation_accuracy", c.validation_accuracy}});
      }
      splice_json = {{"node", to_string(rep.path)},
                     {"prosthetic_samples", pdata.size()},
                     {"prosthetic_train_accuracy", rep.prosthetic_train_accuracy},
                     {"train_before", rep.train_before},
                     {"train_after", rep.train_after},
                     {"test_before", rep.test_before},
                     {"test_after", rep.test_after},
                     {"candidates", std::move(cands)}};
      if (cfg.figures) {
        const auto kids = top_level_paths(rep.tree);
        std::vector<ProbeArray> after;
        for (const NodePath& p : kids) after.push_back(probe_node(rep.tree, p, tez, "test"));
        write_svg(probe_figure(after, "top-level nodes after splice"), dir / "figures" / "probes_spliced.svg");
      }
      r.prosthetic = std::move(rep);
    } catch (const std::exception& e) {
      r.prosthetic_error = e.what();
      splice_json = {{"error", r.prosthetic_error}};
      log_warning("splice skipped: " + r.prosthetic_error);
    }
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::write_json_file(
      dir / "manifest.json",
      json{{"kind", "mnist-experiment"},
           {"seed", cfg.seed},
           {"train_size", splits.train.size()},
           {"validation_size", splits.validation.size()},
           {"test_size", splits.test.size()},
           {"bottleneck", cfg.arch.bottleneck_width},
           {"base", cfg.arch.base.hidden_widths},
           {"host_train_accuracy", r.host_train_accuracy},
           {"host_test_accuracy", r.host_test_accuracy},
           {"states", r.states},
           {"boundary_states", r.boundary_states},
           {"leaves", r.leaves},
           {"circuit_train_accuracy", r.circuit_train_accuracy},
           {"circuit_test_accuracy", r.circuit_test_accuracy},
           {"enumerated_test", r.enumerated_test},
           {"agreeing_test", r.agreeing_test},
           {"flags", r.flags.size()},
           {"splice", std::move(splice_json)},
           {"seconds", seconds}});
  return r;
}

}  // namespace relucirc
