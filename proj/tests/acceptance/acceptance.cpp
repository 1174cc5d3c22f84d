// Acceptance runner. One invocation checks one criterion and prints a single
// "criterion N: PASS|FAIL ..." line, which is also stored under
// <work>/results so that --summary can print the whole table.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "relucirc/capacity.hpp"
#include "relucirc/circuit.hpp"
#include "relucirc/circuit_eval.hpp"
#include "relucirc/experiment.hpp"
#include "relucirc/operand.hpp"
#include "relucirc/property_suite.hpp"
#include "relucirc/trainer.hpp"

using namespace relucirc;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kCriteria = 10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path work;
  fs::path source;
  std::string cli;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing " + p.string());
  return json::parse(in);
}

// cell.json stores reals as strings so that inf survives
double number(const json& v) {
  if (v.is_number()) return v.get<double>();
  return std::stod(v.get<std::string>());
}

bool close_rel(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

// ---------------------------------------------------------------------------

Outcome criterion1(const Context&) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> side(1, 8);
  std::uniform_int_distribution<int> small(-4, 4);
  std::normal_distribution<double> real;
  std::size_t agree = 0;
  const std::size_t tables = 1000;
  for (std::size_t t = 0; t < tables; ++t) {
    const int na = side(rng), nb = side(rng);
    // half of the tables use small integers so that exact zeros are common
    const bool ints = t % 2 == 0;
    std::vector<std::vector<double>> f(static_cast<std::size_t>(na), std::vector<double>(static_cast<std::size_t>(nb)));
    for (auto& row : f) {
      for (auto& v : row) v = ints ? small(rng) : real(rng);
    }
    double saddle = -INFINITY;
    bool boolean = false;
    for (const auto& row : f) {
      double lo = INFINITY;
      bool all = true;
      for (double v : row) {
        lo = std::min(lo, v);
        all = all && v >= 0;
      }
      saddle = std::max(saddle, lo);
      boolean = boolean || all;
    }
    // the library's circuit evaluation on the same table
    CircuitTree num(CircuitMode::kNumeric, 1), log(CircuitMode::kLogical, 1);
    for (CircuitTree* tree : {&num, &log}) {
      const bool n = tree == &num;
      const auto root = tree->add_node(n ? NodeKind::kMax : NodeKind::kOr, 2, CircuitTree::kNoLabel,
                                       static_cast<std::uint32_t>(na));
      for (int a = 0; a < na; ++a) {
        const auto row = tree->add_node(n ? NodeKind::kMin : NodeKind::kAnd, 1, CircuitTree::kNoLabel,
                                        static_cast<std::uint32_t>(nb));
        tree->set_child(root, static_cast<std::uint32_t>(a), row);
        for (int b = 0; b < nb; ++b) {
          const double c[2] = {0.0, f[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]};
          const auto leaf = tree->add_node(NodeKind::kLeaf, 0, CircuitTree::kNoLabel, 0);
          tree->set_leaf_atom(leaf, tree->add_atom(c));
          tree->set_child(row, static_cast<std::uint32_t>(b), leaf);
        }
      }
      tree->set_root(root);
    }
    const Vector x = Vector::Zero(1);
    const bool lib_sign = eval_numeric(num, x) >= 0;
    const bool lib_bool = eval_logical(log, x);
    agree += (saddle >= 0) == boolean && lib_sign == (saddle >= 0) && lib_bool == boolean;
  }
  PropertySuiteOptions opt;
  opt.trials = 1000;
  opt.max_table_side = 8;
  opt.networks = 0;
  const PropertyReport rep = run_property_suite(opt);
  const PropertyResult* lib = rep.find(kPropMinMaxBoolean);
  const bool lib_ok = lib && lib->passed() && lib->checks >= 1000;
  const double secs = since(t0);
  Outcome o;
  o.pass = agree == tables && lib_ok && secs < 10.0;
  o.detail = std::to_string(agree) + "/" + std::to_string(tables) + " tables agree; library suite " +
             (lib_ok ? "ok (" + std::to_string(lib->checks) + " checks)" : "FAILED") + "; " + fmt("%.2f s", secs);
  return o;
}

Outcome criterion2(const Context&) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::bernoulli_distribution coin(0.5);
  const double tol = 1e-9;
  std::size_t saddle_ok = 0, saddle_n = 0, ineq_ok = 0, ineq_n = 0;
  double worst_saddle = 0.0, worst_slack = 0.0;
  auto bools = [](const NetworkState& s) {
    std::vector<bool> b(s.bits.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = s.bits.get(i);
    return b;
  };
  auto slack_ok = [&](double lo, double hi, double scale) {
    const double s = (hi - lo) / std::max(1.0, scale);
    worst_slack = std::min(worst_slack, s);
    ++ineq_n;
    ineq_ok += s >= -tol;
  };
  for (int net = 0; net < 20; ++net) {
    const ArchSpec arch = oracle::random_arch(rng, 2, 4, 8);
    const MlpParams p = oracle::random_params(arch, rng);
    const std::size_t n = arch.hidden_neuron_count();
    for (int k = 0; k < 50; ++k) {
      Vector x(2);
      x << u(rng), u(rng);
      const auto ref = oracle::forward(p, x);
      NetworkState s{BitVector(n)};
      for (std::size_t i = 0; i < n; ++i) s.bits.set(i, ref.state[i]);
      const double f_ss = net_operand_atom(p, s, s)(x);
      const double scale = std::max(1.0, std::abs(ref.output));
      const double err = std::abs(f_ss - ref.output) / scale;
      worst_saddle = std::max(worst_saddle, err);
      ++saddle_n;
      saddle_ok += err <= tol && std::abs(oracle::operand(p, ref.state, ref.state, x) - ref.output) / scale <= tol;
      // random hypothetical states plus the true one
      std::vector<NetworkState> others{s};
      for (int r = 0; r < 8; ++r) {
        NetworkState o{BitVector(n)};
        for (std::size_t i = 0; i < n; ++i) o.bits.set(i, coin(rng));
        others.push_back(o);
      }
      for (const auto& m : others) {
        for (const auto& t : others) {
          const double f_ms = net_operand_atom(p, m, s)(x);
          const double f_st = net_operand_atom(p, s, t)(x);
          double min_t = INFINITY, max_m = -INFINITY;
          for (const auto& q : others) {
            min_t = std::min(min_t, net_operand_atom(p, m, q)(x));
            max_m = std::max(max_m, net_operand_atom(p, q, t)(x));
          }
          // min_t F(m,t) <= F(m,s) <= N <= F(s,t) <= max_m F(m,t), checked against the scalar reference too
          slack_ok(min_t, f_ms, scale);
          slack_ok(f_ms, ref.output, scale);
          slack_ok(oracle::operand(p, bools(m), ref.state, x), ref.output, scale);
          slack_ok(ref.output, f_st, scale);
          slack_ok(ref.output, oracle::operand(p, ref.state, bools(t), x), scale);
          slack_ok(f_st, max_m, scale);
        }
      }
    }
  }
  PropertySuiteOptions opt;
  opt.trials = 0;
  opt.networks = 20;
  opt.inputs_per_network = 50;
  opt.max_depth = 4;
  opt.max_width = 8;
  opt.tolerance = tol;
  const PropertyReport rep = run_property_suite(opt);
  const bool lib_ok = rep.find(kPropSaddle) && rep.find(kPropSaddle)->passed() && rep.find(kPropLemma) &&
                      rep.find(kPropLemma)->passed();
  const double secs = since(t0);
  Outcome o;
  o.pass = saddle_ok == saddle_n && ineq_ok == ineq_n && lib_ok && secs < 30.0;
  o.detail = "saddle " + std::to_string(saddle_ok) + "/" + std::to_string(saddle_n) + " (worst " +
             fmt("%.2e", worst_saddle) + "), inequalities " + std::to_string(ineq_ok) + "/" + std::to_string(ineq_n) +
             " (worst slack " + fmt("%.2e", worst_slack) + "), library suite " + (lib_ok ? "ok" : "FAILED") + "; " +
             fmt("%.2f s", secs);
  return o;
}

std::vector<fs::path> matrix_cells(const Context& c) {
  std::vector<fs::path> out;
  const fs::path dir = c.work / "matrix";
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && fs::exists(e.path() / "cell.json")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome criterion3(const Context& c) {
  const auto cells = matrix_cells(c);
  std::size_t good = 0;
  double worst = 0.0;
  std::string bad;
  for (const auto& cell : cells) {
    try {
      const json r = read_json(cell / "verify_numeric.json");
      const double d = r.at("max_abs_diff_guaranteed").get<double>();
      worst = std::max(worst, d);
      if (d <= 1e-6 && r.at("guaranteed_points").get<std::uint64_t>() > 0) {
        ++good;
      } else {
        bad += " " + cell.filename().string();
      }
    } catch (const std::exception& e) {
      bad += " " + cell.filename().string() + "(" + e.what() + ")";
    }
  }
  Outcome o;
  o.pass = cells.size() == 9 && good == 9;
  o.detail = std::to_string(good) + "/" + std::to_string(cells.size()) + " cells with max |N - tree| <= 1e-6 (worst " +
             fmt("%.2e", worst) + ")" + (bad.empty() ? "" : "; failing:" + bad);
  return o;
}

Outcome criterion4(const Context& c) {
  const auto cells = matrix_cells(c);
  std::size_t good = 0;
  double worst_fine = 1.0;
  std::string bad;
  for (const auto& cell : cells) {
    try {
      const json r = read_json(cell / "verify_logical.json");
      const double agree = r.at("agreement").get<double>();
      const double fine = r.at("fine_agreement").get<double>();
      const auto unattr = r.at("unattributable").get<std::uint64_t>();
      worst_fine = std::min(worst_fine, fine);
      if (agree == 1.0 && fine >= 0.999 && unattr == 0) {
        ++good;
      } else {
        bad += " " + cell.filename().string();
      }
    } catch (const std::exception& e) {
      bad += " " + cell.filename().string() + "(" + e.what() + ")";
    }
  }
  Outcome o;
  o.pass = cells.size() == 9 && good == 9;
  o.detail = std::to_string(good) + "/" + std::to_string(cells.size()) +
             " cells with full grid agreement and attributable fine-grid misses (worst fine agreement " +
             fmt("%.5f", worst_fine) + ")" + (bad.empty() ? "" : "; failing:" + bad);
  return o;
}

Outcome criterion5(const Context& c) {
  ExperimentMatrixConfig cfg;
  cfg.tiers = {Tier::kDataI};
  cfg.seeds = {1, 2, 3};
  cfg.figures = false;
  const MatrixResult r = run_experiment_matrix(cfg, c.work / "criterion5");
  std::size_t small = 0, capped = 0, ok = 0;
  std::ostringstream runs;
  for (const auto& cell : r.cells) {
    if (!cell.ok()) continue;
    ++ok;
    small += cell.boundary_states <= 4;
    capped += cell.vc_bool <= cell.vc_nodata / 100.0;
    runs << ' ' << cell.arch << "/s" << cell.seed << ":" << cell.boundary_states << "," << fmt("%.1f", cell.vc_bool)
         << "/" << fmt("%.0f", cell.vc_nodata);
  }
  Outcome o;
  const bool states_clause = ok == 9 && small >= 8;
  const bool vc_clause = ok == 9 && capped == 9;
  o.pass = states_clause && vc_clause;
  o.detail = "|Sigma_0| <= 4 in " + std::to_string(small) + "/9 runs (" + (states_clause ? "ok" : "FAIL") +
             "); VC_Bool <= VC_NoData/100 in " + std::to_string(capped) + "/9 (" + (vc_clause ? "ok" : "FAIL") +
             "); runs |Sigma_0|,VC_Bool/VC_NoData:" + runs.str();
  return o;
}

Outcome criterion6(const Context& c) {
  std::map<std::string, std::pair<double, double>> by_arch;  // arch -> (vc_bool, vc_nodata)
  for (const auto& cell : matrix_cells(c)) {
    const json j = read_json(cell / "cell.json");
    if (j.at("tier") != "DataII" || j.at("status") != "ok") continue;
    by_arch[j.at("arch").get<std::string>()] = {number(j.at("vc_bool")), number(j.at("vc_nodata"))};
  }
  Outcome o;
  if (by_arch.size() != 3) {
    o.detail = "expected three DataII cells, found " + std::to_string(by_arch.size());
    return o;
  }
  double bmin = INFINITY, bmax = 0, nmin = INFINITY, nmax = 0;
  std::string vals;
  for (const auto& [arch, v] : by_arch) {
    bmin = std::min(bmin, v.first);
    bmax = std::max(bmax, v.first);
    nmin = std::min(nmin, v.second);
    nmax = std::max(nmax, v.second);
    vals += " " + arch + "=" + fmt("%.1f", v.first) + "/" + fmt("%.1f", v.second);
  }
  const double rb = bmax / bmin, rn = nmax / nmin;
  const bool bool_clause = rb < 10.0;
  const bool nodata_clause = rn > 50.0;
  o.pass = bool_clause && nodata_clause;
  o.detail = "VC_Bool spread " + fmt("%.2f", rb) + "x (< 10x " + (bool_clause ? "ok" : "FAIL") + "); VC_NoData spread " +
             fmt("%.2f", rn) + "x (> 50x " + (nodata_clause ? "ok" : "FAIL") + "); VC_Bool/VC_NoData:" + vals;
  return o;
}

Outcome criterion7(const Context&) {
  std::vector<std::string> fails;
  auto expect = [&](const std::string& what, double got, double want) {
    if (!close_rel(got, want)) fails.push_back(what + "=" + fmt("%.12g", got) + " want " + fmt("%.12g", want));
  };
  const double e = std::exp(1.0);
  expect("jerrum(3,1,1)", jerrum_bound(3, 1, 1), 2.0 * 3.0 * std::log2(8.0 * e));
  expect("jerrum(15,4,3)", jerrum_bound(15, 4, 3), 2.0 * 15.0 * std::log2(8.0 * e * 3.0 * 4.0));
  expect("jerrum(109,19,4)", jerrum_bound(109, 19, 4), 218.0 * std::log2(8.0 * e * 76.0));
  if (jerrum_bound(0, 3, 2) != 0.0) fails.push_back("jerrum(0,3,2) != 0");
  expect("gamma_bool(25,100)", gamma_bool(25.0, 100), 0.5);
  expect("gamma_bool(2,8)", gamma_bool(2.0, 8), 0.5);

  const std::vector<Matrix> id{Matrix::Identity(2, 2)};
  const NormBounds b1 = norm_bounds(std::span<const Matrix>(id), 100, 1.0);
  expect("frobenius(I2)", b1.frobenius, 0.02);
  expect("spec_l12(I2)", b1.spec_l12, 0.04);
  expect("spec_fro(I2)", b1.spec_fro, 0.04);
  // two layers: W1 = diag(2, 1), W2 = [3 4]
  Matrix w1 = Matrix::Zero(2, 2);
  w1(0, 0) = 2.0;
  w1(1, 1) = 1.0;
  Matrix w2(1, 2);
  w2 << 3.0, 4.0;
  const std::vector<Matrix> two{w1, w2};
  const NormBounds b2 = norm_bounds(std::span<const Matrix>(two), 10, 2.0);
  // ||W1||_F^2 = 5, ||W2||_F^2 = 25, ||W1||_2 = 2, ||W2||_2 = 5, l12: 3 and 7, m gamma^2 = 40
  expect("frobenius(two)", b2.frobenius, 5.0 * 25.0 / 40.0);
  expect("spec_l12(two)", b2.spec_l12, 4.0 * 25.0 * (9.0 / 4.0 + 49.0 / 25.0) / 40.0);
  expect("spec_fro(two)", b2.spec_fro, 4.0 * 25.0 * (2.0 * 5.0 / 4.0 + 1.0 * 25.0 / 25.0) / 40.0);
  for (double g : {0.1, 0.37, 3.0}) {
    const NormBounds bg = norm_bounds(std::span<const Matrix>(two), 10, g);
    const double k = (2.0 * 2.0) / (g * g);
    expect("1/gamma^2 frobenius", bg.frobenius, b2.frobenius * k);
    expect("1/gamma^2 spec_l12", bg.spec_l12, b2.spec_l12 * k);
    expect("1/gamma^2 spec_fro", bg.spec_fro, b2.spec_fro * k);
  }
  if (!std::isinf(norm_bounds(std::span<const Matrix>(two), 10, 0.0).frobenius)) fails.push_back("gamma=0 not inf");
  Outcome o;
  o.pass = fails.empty();
  o.detail = fails.empty() ? "all hand-derived values within 1e-9 relative; exact 1/gamma^2 scaling"
                           : std::to_string(fails.size()) + " mismatches: " + fails.front();
  return o;
}

Outcome criterion8(const Context&) {
  std::mt19937_64 rng(8);
  const double h = 1e-6;
  std::size_t compared = 0, good = 0, skipped = 0;
  double worst = 0.0;
  for (int config = 0; config < 5; ++config) {
    const ArchSpec arch = oracle::random_arch(rng, 3, 4, 6);
    MlpParams p = oracle::random_params(arch, rng);
    Dataset d;
    d.points = Matrix::Random(3, 20) * 2.0;
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 20; ++i) d.labels.push_back(coin(rng));
    MlpParams grad;
    loss_and_gradient(p, d, grad);
    auto ref_loss = [&]() {
      double s = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double z = oracle::forward(p, d.point(i)).output;
        s += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - d.labels[i] * z;
      }
      return s / static_cast<double>(d.size());
    };
    auto states = [&]() {
      std::vector<bool> out;
      for (std::size_t i = 0; i < d.size(); ++i) {
        const auto f = oracle::forward(p, d.point(i));
        out.insert(out.end(), f.state.begin(), f.state.end());
      }
      return out;
    };
    auto check = [&](double& theta, double g) {
      const double keep = theta;
      theta = keep + h;
      const auto sp = states();
      const double lp = ref_loss();
      theta = keep - h;
      const auto sm = states();
      const double lm = ref_loss();
      theta = keep;
      if (sp != sm) {
        ++skipped;
        return;
      }
      const double fd = (lp - lm) / (2 * h);
      const double rel = std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-3});
      worst = std::max(worst, rel);
      ++compared;
      good += rel <= 1e-4;
    };
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      for (Eigen::Index i = 0; i < p.weights[l].size(); ++i) check(p.weights[l].data()[i], grad.weights[l].data()[i]);
      for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) check(p.biases[l][i], grad.biases[l][i]);
    }
  }
  Outcome o;
  o.pass = compared > 0 && good == compared;
  o.detail = std::to_string(good) + "/" + std::to_string(compared) + " coordinates within 1e-4 relative over 5 configs (" +
             std::to_string(skipped) + " straddling a ReLU kink skipped, worst " + fmt("%.2e", worst) + ")";
  return o;
}

// Runs the default matrix through the command-line tool; criteria 3, 4, 6 and
// 9 read what it leaves behind.
int run_matrix(const Context& c) {
  const fs::path dir = c.work / "matrix";
  fs::remove_all(dir);
  fs::create_directories(c.work);
  const auto t0 = Clock::now();
  const std::string cmd =
      c.cli + " --out-dir \"" + dir.string() + "\" matrix > \"" + (c.work / "matrix.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  const double secs = since(t0);
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ofstream(c.work / "matrix_run.json") << json{{"exit_code", code}, {"seconds", secs}}.dump(1);
  std::printf("matrix run: exit %d after %.1f s\n", code, secs);
  return fs::exists(dir / "summary.csv") ? 0 : 1;
}

Outcome criterion9(const Context& c) {
  Outcome o;
  json run;
  try {
    run = read_json(c.work / "matrix_run.json");
  } catch (const std::exception& e) {
    o.detail = e.what();
    return o;
  }
  const double secs = run.at("seconds").get<double>();
  const int code = run.at("exit_code").get<int>();
  const fs::path dir = c.work / "matrix";
  std::vector<std::string> missing;
  for (const char* f : {"summary.csv", "summary.md", "manifest.json", "vc_by_arch.svg", "boundary_states_by_arch.svg"}) {
    if (!fs::exists(dir / f)) missing.push_back(f);
  }
  const auto cells = matrix_cells(c);
  std::size_t verified = 0;
  for (const auto& cell : cells) {
    for (const char* f : {"bounds.csv", "figures/nsb.svg", "figures/bounds.svg", "figures/regions/root.svg"}) {
      if (!fs::exists(cell / f)) missing.push_back(cell.filename().string() + "/" + f);
    }
    const json j = read_json(cell / "cell.json");
    verified += j.at("status") == "ok" && j.at("numeric_pass").get<bool>() && j.at("logical_pass").get<bool>();
  }
  o.pass = code == 0 && cells.size() == 9 && verified == 9 && missing.empty() && secs < 1800.0;
  o.detail = std::to_string(verified) + "/" + std::to_string(cells.size()) + " cells verified, exit code " +
             std::to_string(code) + ", " + fmt("%.1f s", secs) + " on this machine (limit 1800 s)" +
             (missing.empty() ? "" : "; missing " + missing.front());
  return o;
}

Outcome criterion10(const Context& c) {
  const auto t0 = Clock::now();
  std::size_t extracted = 0, agreeing_seeds = 0, overfit = 0, overfit_flagged = 0, improved = 0;
  std::ostringstream seeds;
  for (std::uint64_t seed : {1, 2, 3}) {
    MnistExperimentConfig cfg;
    cfg.data_dir = c.source / "data" / "mnist";
    cfg.seed = seed;
    seeds << " [s" << seed << ": ";
    try {
      const MnistExperimentResult r = run_mnist_experiment(cfg, c.work / "mnist" / ("s" + std::to_string(seed)));
      const bool is_overfit = r.host_train_accuracy >= 0.99 && r.host_train_accuracy - r.host_test_accuracy >= 0.05;
      extracted += r.leaves > 0;
      agreeing_seeds += r.enumerated_test > 0 && r.sign_agreement() >= 0.99;
      overfit += is_overfit;
      overfit_flagged += is_overfit && !r.flags.empty();
      improved += r.improved();
      seeds << "host " << fmt("%.3f", r.host_train_accuracy) << "/" << fmt("%.3f", r.host_test_accuracy) << ", "
            << r.leaves << " leaves, agreement " << fmt("%.4f", r.sign_agreement()) << " on " << r.enumerated_test
            << ", " << r.flags.size() << " flags";
      if (!r.flags.empty()) seeds << " (max gap " << fmt("%.2f", r.flags.front().gap()) << ")";
      if (r.prosthetic) {
        seeds << ", splice test " << fmt("%.3f", r.prosthetic->test_before) << "->"
              << fmt("%.3f", r.prosthetic->test_after);
      } else {
        seeds << ", no splice (" << r.prosthetic_error << ")";
      }
    } catch (const std::exception& e) {
      seeds << "error: " << e.what();
    }
    seeds << "]";
  }
  const double secs = since(t0);
  Outcome o;
  o.pass = extracted == 3 && agreeing_seeds == 3 && overfit >= 1 && overfit_flagged == overfit && improved >= 1 &&
           secs < 2700.0;
  o.detail = "circuits " + std::to_string(extracted) + "/3, sign agreement >= 0.99 on " +
             std::to_string(agreeing_seeds) + "/3, flagged " + std::to_string(overfit_flagged) + "/" +
             std::to_string(overfit) + " overfit hosts, splice improved " + std::to_string(improved) + "/3, " +
             fmt("%.0f s", secs) + seeds.str();
  return o;
}

const std::map<int, std::function<Outcome(const Context&)>>& table() {
  static const std::map<int, std::function<Outcome(const Context&)>> t{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
  return t;
}

std::string line_for(int n, const Outcome& o) {
  return "criterion " + std::to_string(n) + ": " + (o.pass ? "PASS" : "FAIL") + "  " + o.detail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  Context ctx;
  int criterion = 0;
  bool summary = false, matrix = false;
  std::string work = "acceptance", source = ".";
  app.add_option("--criterion", criterion, "Criterion number (1-10)")->check(CLI::Range(1, kCriteria));
  app.add_flag("--summary", summary, "Print the stored result of every criterion");
  app.add_flag("--run-matrix", matrix, "Run the default experiment matrix used by criteria 3, 4, 6 and 9");
  app.add_option("--work", work, "Working directory for runs and results");
  app.add_option("--source", source, "Source tree (for data/mnist)");
  app.add_option("--cli", ctx.cli, "Path of the relucirc executable")->required();
  CLI11_PARSE(app, argc, argv);
  ctx.work = fs::absolute(work);
  ctx.source = fs::absolute(source);
  const fs::path results = ctx.work / "results";
  fs::create_directories(results);

  if (matrix) return run_matrix(ctx);

  if (summary) {
    int passed = 0;
    for (int n = 1; n <= kCriteria; ++n) {
      std::ifstream in(results / ("criterion_" + std::to_string(n) + ".txt"));
      std::string line;
      if (!std::getline(in, line)) line = "criterion " + std::to_string(n) + ": FAIL  not run";
      passed += line.find(": PASS") != std::string::npos;
      std::printf("%s\n", line.c_str());
    }
    std::printf("%d/%d criteria pass\n", passed, kCriteria);
    return passed == kCriteria ? 0 : 1;
  }

  if (criterion == 0) {
    std::fprintf(stderr, "one of --criterion, --summary or --run-matrix is required\n");
    return 2;
  }
  Outcome o;
  try {
    o = table().at(criterion)(ctx);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("error: ") + e.what();
  }
  const std::string line = line_for(criterion, o);
  std::ofstream(results / ("criterion_" + std::to_string(criterion) + ".txt")) << line << '\n';
  std::printf("%s\n", line.c_str());
  return o.pass ? 0 : 1;
}
