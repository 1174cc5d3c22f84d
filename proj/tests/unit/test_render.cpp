#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "relucirc/config.hpp"
#include "relucirc/error.hpp"
#include "relucirc/experiment.hpp"
#include "relucirc/figures.hpp"
#include "relucirc/nsb.hpp"
#include "relucirc/svg.hpp"
#include "relucirc/synthetic.hpp"

using namespace relucirc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("relucirc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RELUCIRC_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("render-cli") {

TEST_CASE("NSB of a linear neuron is the vertical line x0 = 0.5") {
  MlpParams p = MlpParams::zeros(ArchSpec{2, {1}});
  p.weights[0](0, 0) = 1.0;
  p.biases[0][0] = -0.5;
  p.weights[1](0, 0) = 1.0;
  p.biases[1][0] = -0.2;
  const GridSpec g = GridSpec::uniform(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0), 41);
  const NsbPolyline n = extract_nsb(p, g, {1, 0});
  REQUIRE(!n.lines.empty());
  CHECK(!n.decision_boundary);
  double ymin = 1e9, ymax = -1e9;
  for (const auto& line : n.lines) {
    for (const auto& v : line) {
      CHECK(std::abs(v[0] - 0.5) <= g.min_cell_size() / 100);
      ymin = std::min(ymin, v[1]);
      ymax = std::max(ymax, v[1]);
    }
  }
  CHECK(ymin == doctest::Approx(-1.0));
  CHECK(ymax == doctest::Approx(1.0));
  // output = relu(x0 - 0.5) - 0.2 crosses zero at x0 = 0.7
  const NsbPolyline db = extract_nsb(p, g, NsbTarget::decision_boundary(p.arch));
  CHECK(db.decision_boundary);
  for (const auto& line : db.lines) {
    for (const auto& v : line) CHECK(v[0] == doctest::Approx(0.7).epsilon(1e-6));
  }
}

TEST_CASE("constant-sign neurons give no lines") {
  MlpParams p = MlpParams::zeros(ArchSpec{2, {2}});
  p.biases[0][0] = 3.0;
  p.biases[0][1] = -3.0;
  const GridSpec g = GridSpec::uniform(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0), 20);
  const auto all = extract_all_nsbs(p, g);
  REQUIRE(all.size() == 3);
  for (const auto& n : all) CHECK(n.lines.empty());
  CHECK(all.back().decision_boundary);
  const GridSpec three = GridSpec::uniform(Vector::Constant(3, -1.0), Vector::Constant(3, 1.0), 4);
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(extract_nsb(oracle::random_params(ArchSpec{3, {2}}, rng), three, {1, 0}), InputError);
}

TEST_CASE("NSB vertices lie on the zero set") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 8; ++trial) {
    const MlpParams p = oracle::random_params(oracle::random_arch(rng, 2, 3, 5), rng);
    const GridSpec g = GridSpec::uniform(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0), 60);
    for (const auto& n : extract_all_nsbs(p, g)) {
      for (const auto& line : n.lines) {
        CHECK(line.size() >= 2);
        for (const auto& v : line) {
          const Vector x = (Vector(2) << v[0], v[1]).finished();
          const auto ref = oracle::forward(p, x);
          const double z = n.decision_boundary ? ref.output : ref.pre[n.target.layer - 1][n.target.index];
          CHECK(std::abs(z) <= 1e-6);
          CHECK(v[0] >= -2.0 - 1e-12);
          CHECK(v[0] <= 2.0 + 1e-12);
        }
      }
      std::size_t vc = 0;
      for (const auto& line : n.lines) vc += line.size();
      CHECK(n.vertex_count() == vc);
    }
  }
}

TEST_CASE("SVG output is deterministic and well formed") {
  Figure f;
  f.title = "t & <x>";
  f.lines.push_back({"a", {{{0, 0}, {1, 1}, {2, 0}}}, Style{}});
  f.points.push_back({"p", {{0.5, 0.5}}, 2.0, Style{}});
  f.cells.push_back(Cell{0, 0, 1, 1, "#ff0000", "50%"});
  const std::string a = render_svg(f), b = render_svg(f);
  CHECK(a == b);
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("</svg>") != std::string::npos);
  CHECK(a.find("t &amp; &lt;x&gt;") != std::string::npos);
  CHECK(count_of(a, "<polyline") == 1);
  const std::string empty = render_svg(Figure{});
  CHECK(empty.find("</svg>") != std::string::npos);
  CHECK(empty.find("nan") == std::string::npos);
  const auto ticks = nice_ticks(0.0, 1.0, 5);
  CHECK(ticks.size() >= 3);
  CHECK(ticks.front() >= 0.0);
  CHECK(ticks.back() <= 1.0 + 1e-12);
}

TEST_CASE("NSB figure of a trained DataII network") {
  const Dataset d = gen_synthetic({Tier::kDataII, 50, 0.15, 1});
  TrainConfig cfg;
  cfg.steps = 1500;
  cfg.learning_rate = 0.003;
  cfg.seed = 1;
  cfg.snapshot_every = 0;
  const MlpParams p = train(d, ArchSpec{2, {6, 6, 6, 6, 6, 6}}, cfg).final.mlp;
  REQUIRE(accuracy(p, d) == 1.0);
  const GridSpec g = grid_around(d, 120, 0.25);
  const Figure f = nsb_figure(p, g, &d, "DataII");
  REQUIRE(f.lines.size() == 7);
  CHECK(f.lines.back().name == "decision boundary");
  CHECK(!f.lines.back().lines.empty());
  std::size_t layers_with_lines = 0;
  for (std::size_t l = 0; l + 1 < f.lines.size(); ++l) layers_with_lines += !f.lines[l].lines.empty();
  CHECK(layers_with_lines >= 2);
  const std::string svg = render_svg(f);
  CHECK(svg == render_svg(nsb_figure(p, g, &d, "DataII")));
  CHECK(count_of(svg, "<circle") == d.size());
  // styles differ between the first layer and the boundary
  CHECK(layer_style(1, 6).dash != decision_boundary_style().dash);
}

TEST_CASE("config parsing") {
  const Config c = Config::parse(
      "# comment\n[train]\nsteps = 300\nlearning_rate=0.01\n; other comment\n[matrix]\ntiers = DataI , DataII\n"
      "figures = false\n");
  CHECK(c.get("train.steps", std::size_t{0}) == 300);
  CHECK(c.get("train.learning_rate", 0.0) == 0.01);
  CHECK(c.get_list("matrix.tiers", {}) == std::vector<std::string>{"DataI", "DataII"});
  CHECK(!c.get("matrix.figures", true));
  CHECK(c.get("missing", std::string("x")) == "x");
  CHECK_THROWS_AS(c.get("train.learning_rate", std::size_t{0}), InputError);
  CHECK_THROWS_AS(c.check_known({"train.steps"}), InputError);
  CHECK_THROWS_AS(Config::parse("no equals sign\n"), FormatError);
  CHECK_THROWS_AS(Config::load("/nonexistent/file.ini"), InputError);
}

TEST_CASE("experiment config") {
  const ExperimentMatrixConfig def;
  def.validate();
  CHECK(def.arches.size() == 3);
  CHECK(def.arches[2].hidden_widths.size() == 9);
  Config c = Config::parse("[matrix]\ntiers = DataII\narches = ArchI, Wide\nseeds = 3, 4\n[arch]\nWide = 6,6,6,8\n"
                           "[train]\nsteps = 50\n[ui]\ncolour = red\n");
  const ExperimentMatrixConfig m = ExperimentMatrixConfig::from_config(c);
  CHECK(m.tiers == std::vector<Tier>{Tier::kDataII});
  CHECK(m.seeds == std::vector<std::uint64_t>{3, 4});
  REQUIRE(m.arches.size() == 2);
  CHECK(m.arches[1].hidden_widths == std::vector<std::size_t>{6, 6, 6, 8});
  CHECK(m.train.steps == 50);
  c.set("train.stepz", "1");
  CHECK_THROWS_AS(ExperimentMatrixConfig::from_config(c), InputError);
  ExperimentMatrixConfig bad;
  bad.arches = {{"A", {6, 6}}, {"B", {6, 5, 6}}};
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad.arches = {};
  CHECK_THROWS_AS(bad.validate(), InputError);
  MnistExperimentConfig mn;
  mn.validate();
  mn.arch.bottleneck_width = 9;
  CHECK_THROWS_AS(mn.validate(), InputError);
}

TEST_CASE("small matrix runs are reproducible") {
  ExperimentMatrixConfig cfg;
  cfg.tiers = {Tier::kDataI};
  cfg.arches = {default_arch_presets().front()};
  cfg.seeds = {1};
  cfg.samples_per_class = 40;
  cfg.train.steps = 300;
  cfg.train.snapshot_every = 150;
  cfg.grid_resolution = 48;
  cfg.series_resolution = 24;
  cfg.figures = false;
  cfg.threads = 1;
  const fs::path a = scratch("matrix_a"), b = scratch("matrix_b");
  const MatrixResult ra = run_experiment_matrix(cfg, a);
  const MatrixResult rb = run_experiment_matrix(cfg, b);
  REQUIRE(ra.cells.size() == 1);
  CHECK(ra.cells[0].ok());
  CHECK(ra.find(Tier::kDataI, "ArchI", 1) != nullptr);
  CHECK(ra.find(Tier::kDataII, "ArchI", 1) == nullptr);
  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
  CHECK(slurp(a / "summary.md") == slurp(b / "summary.md"));
  const fs::path cell = a / "DataI_ArchI_s1";
  for (const char* f : {"data.csv", "states.csv", "bounds.csv", "cell.json", "verify_logical.json",
                        "circuit_logical.json"}) {
    CHECK(fs::exists(cell / f));
  }
  CHECK(ra.cells[0].series.size() == 3);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("command-line driver") {
  const fs::path dir = scratch("cli");
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("--out-dir " + (dir / "g").string() + " gen-data --tier DataII --samples-per-class 20 --out " +
                (dir / "d.csv").string()) == 0);
  REQUIRE(fs::exists(dir / "d.csv"));
  CHECK(read_dataset_csv(dir / "d.csv").size() == 60);
  CHECK(run_cli("--out-dir " + (dir / "m").string() + " train --data " + (dir / "d.csv").string() +
                " --arch 4,4 --steps 100 --snapshot-every 0") == 0);
  CHECK(fs::exists(dir / "m" / "model.json"));
  CHECK(fs::exists(dir / "m" / "manifest.json"));
  const std::string out = "--out-dir " + (dir / "bad").string() + " ";
  CHECK(run_cli(out + "gen-data --tier DataIV") == 2);
  CHECK(run_cli(out + "train --data " + (dir / "missing.csv").string()) != 0);
  CHECK(run_cli(out + "no-such-command") != 0);
  fs::remove_all(dir);
}

}
