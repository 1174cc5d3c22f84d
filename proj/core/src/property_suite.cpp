#include "relucirc/property_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "json_util.hpp"
#include "relucirc/circuit.hpp"
#include "relucirc/circuit_eval.hpp"
#include "relucirc/grid.hpp"
#include "relucirc/registry.hpp"

namespace relucirc {

bool PropertyReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.passed(); });
}

const PropertyResult* PropertyReport::find(const std::string& name) const {
  for (const auto& r : results) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::string PropertyReport::to_json() const {
  detail::json arr = detail::json::array();
  for (const auto& r : results) {
    arr.push_back({{"name", r.name},
                   {"checks", r.checks},
                   {"failures", r.failures},
                   {"passed", r.passed()},
                   {"seconds", r.seconds},
                   {"counterexamples", r.counterexamples}});
  }
  return detail::json{{"passed", passed()}, {"properties", std::move(arr)}}.dump(1);
}

namespace {

using Clock = std::chrono::steady_clock;

void fail(PropertyResult& r, const std::string& what) {
  ++r.failures;
  if (r.counterexamples.size() < 5) r.counterexamples.push_back(what);
}

MlpParams random_net(std::mt19937_64& rng, const PropertySuiteOptions& o, std::size_t input_dim) {
  std::uniform_int_distribution<std::size_t> depth(1, std::max<std::size_t>(1, o.max_depth));
  std::uniform_int_distribution<std::size_t> width(1, std::max<std::size_t>(1, o.max_width));
  ArchSpec arch;
  arch.input_dim = input_dim;
  const std::size_t d = depth(rng);
  for (std::size_t l = 0; l < d; ++l) arch.hidden_widths.push_back(width(rng));
  MlpParams p = MlpParams::zeros(arch);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& w : p.weights) w = w.unaryExpr([&](double) { return g(rng); });
  for (auto& b : p.biases) b = b.unaryExpr([&](double) { return 0.5 * g(rng); });
  return p;
}

NetworkState random_state(std::mt19937_64& rng, std::size_t n) {
  NetworkState s{BitVector(n)};
  for (std::size_t i = 0; i < n; ++i) s.bits.set(i, (rng() & 1u) != 0);
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_minmax_tables(const PropertySuiteOptions& o, std::mt19937_64& rng, PropertyResult& r) {
  std::uniform_int_distribution<std::size_t> side(1, std::max<std::size_t>(1, o.max_table_side));
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> small(-2, 2);
  for (std::size_t t = 0; t < o.trials; ++t) {
    const std::size_t a = side(rng);
    const std::size_t b = side(rng);
    // Every other table uses small integers so exact zeros and ties occur.
    const bool ints = t % 2 == 1;
    Matrix f(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = ints ? small(rng) : g(rng);
    double maxmin = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      maxmin = std::max(maxmin, f.row(i).minCoeff());
      bool all = true;
      for (Eigen::Index j = 0; j < f.cols(); ++j) all = all && f(i, j) >= 0.0;
      any = any || all;
    }
    ++r.checks;
    if ((maxmin >= 0.0) != any) fail(r, "table " + std::to_string(a) + "x" + std::to_string(b) + " trial " + std::to_string(t));
  }
}

struct NetCase {
  MlpParams params;
  std::vector<Vector> inputs;
  std::vector<NetworkState> states;  // state of each input
  std::vector<NetworkState> sigma;   // distinct states, sorted
  std::vector<double> outputs;
};

NetCase make_case(std::mt19937_64& rng, const PropertySuiteOptions& o) {
  NetCase c;
  std::uniform_int_distribution<std::size_t> dim(1, 3);
  c.params = random_net(rng, o, dim(rng));
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < o.inputs_per_network; ++i) {
    Vector x(static_cast<Eigen::Index>(c.params.arch.input_dim));
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = g(rng);
    const ForwardTrace tr = forward(c.params, x);
    c.inputs.push_back(x);
    c.states.push_back(tr.state);
    c.outputs.push_back(tr.output);
  }
  c.sigma = c.states;
  std::sort(c.sigma.begin(), c.sigma.end());
  c.sigma.erase(std::unique(c.sigma.begin(), c.sigma.end()), c.sigma.end());
  return c;
}

void check_operand(const PropertySuiteOptions& o, const NetCase& c, std::mt19937_64& rng, PropertyResult& saddle,
                   PropertyResult& lemma) {
  const std::size_t n_bits = c.params.arch.hidden_neuron_count();
  std::uniform_int_distribution<std::size_t> pick(0, c.sigma.size() - 1);
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    const Vector& x = c.inputs[i];
    const NetworkState& s = c.states[i];
    const double n = c.outputs[i];
    const double tol = o.tolerance * std::max(1.0, std::abs(n));

    const double sad = o.operand(c.params, s, s)(x);
    ++saddle.checks;
    if (!(std::abs(sad - n) <= tol)) fail(saddle, "F(s,s,x)=" + fmt(sad) + " N(x)=" + fmt(n) + " state " + s.to_string());

    // mu-hat / tau-hat: half from the realized set, half arbitrary bit vectors.
    const NetworkState mu_hat = (rng() & 1u) ? c.sigma[pick(rng)] : random_state(rng, n_bits);
    const NetworkState tau_hat = (rng() & 1u) ? c.sigma[pick(rng)] : random_state(rng, n_bits);
    double min_t_muhat = std::numeric_limits<double>::infinity();
    double max_m_tauhat = -std::numeric_limits<double>::infinity();
    double min_t_sigma = std::numeric_limits<double>::infinity();
    double max_m_sigma = -std::numeric_limits<double>::infinity();
    for (const auto& t : c.sigma) {
      min_t_muhat = std::min(min_t_muhat, o.operand(c.params, mu_hat, t)(x));
      max_m_tauhat = std::max(max_m_tauhat, o.operand(c.params, t, tau_hat)(x));
      min_t_sigma = std::min(min_t_sigma, o.operand(c.params, s, t)(x));
      max_m_sigma = std::max(max_m_sigma, o.operand(c.params, t, s)(x));
    }
    const double f_mu_s = o.operand(c.params, mu_hat, s)(x);
    const double f_s_tau = o.operand(c.params, s, tau_hat)(x);
    const double chain[] = {min_t_muhat, f_mu_s, n, f_s_tau, max_m_tauhat};
    for (int k = 0; k < 4; ++k) {
      ++lemma.checks;
      if (!(chain[k] <= chain[k + 1] + tol)) {
        fail(lemma, "inequality " + std::to_string(k + 1) + " violated: " + fmt(chain[k]) + " > " + fmt(chain[k + 1]) +
                        " at state " + s.to_string());
      }
    }
    lemma.checks += 2;
    if (!(std::abs(min_t_sigma - n) <= tol)) fail(lemma, "min_t F(s,t,x)=" + fmt(min_t_sigma) + " != N(x)=" + fmt(n));
    if (!(std::abs(max_m_sigma - n) <= tol)) fail(lemma, "max_m F(m,s,x)=" + fmt(max_m_sigma) + " != N(x)=" + fmt(n));
  }
}

void check_flat_tree(const PropertySuiteOptions& o, const NetCase& c, PropertyResult& r) {
  if (c.sigma.size() > 40) return;
  // Atoms come from the operand under test so the check covers it too.
  const std::size_t n = c.sigma.size();
  std::vector<AffineAtom> atoms;
  atoms.reserve(n * n);
  for (const auto& m : c.sigma) {
    for (const auto& t : c.sigma) atoms.push_back(o.operand(c.params, m, t));
  }
  const CircuitTree tree = build_tree(c.params, c.sigma, CircuitMode::kNumeric);
  TreeEvaluator ev(tree);
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    const Vector& x = c.inputs[i];
    double maxmin = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < n; ++b) m = std::min(m, atoms[a * n + b](x));
      maxmin = std::max(maxmin, m);
    }
    double minmax = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < n; ++b) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < n; ++a) m = std::max(m, atoms[a * n + b](x));
      minmax = std::min(minmax, m);
    }
    const double tv = ev.numeric(x, &c.states[i]);
    const double tv_plain = ev.numeric(x);
    const double nx = c.outputs[i];
    const double tol = o.tree_tolerance * std::max(1.0, std::abs(nx));
    ++r.checks;
    if (!(std::abs(maxmin - nx) <= tol && std::abs(minmax - nx) <= tol && std::abs(tv - nx) <= tol &&
          std::abs(tv_plain - nx) <= tol)) {
      fail(r, "N=" + fmt(nx) + " maxmin=" + fmt(maxmin) + " minmax=" + fmt(minmax) + " tree=" + fmt(tv));
    }
  }
}

void check_sigma_pm(const PropertySuiteOptions& o, const NetCase& c, PropertyResult& r) {
  if (c.params.arch.input_dim > 2) return;
  Vector lo = Vector::Constant(static_cast<Eigen::Index>(c.params.arch.input_dim), -2.0);
  Vector hi = Vector::Constant(static_cast<Eigen::Index>(c.params.arch.input_dim), 2.0);
  const GridSpec grid = GridSpec::uniform(lo, hi, c.params.arch.input_dim == 1 ? 64 : 16);
  const StateRegistry reg = enumerate_states(c.params, grid, EnumerateOptions{100'000'000, 1});
  const auto plus = reg.sigma_plus();
  const auto minus = reg.sigma_minus();
  if (plus.empty() || minus.empty() || plus.size() * minus.size() > 4000) return;
  std::vector<AffineAtom> atoms;
  for (const auto& m : plus) {
    for (const auto& t : minus) atoms.push_back(o.operand(c.params, m, t));
  }
  Evaluator net(c.params);
  Vector x;
  for (std::uint64_t i = 0; i < grid.total_points(); ++i) {
    grid.point(i, x);
    const bool sign = net.evaluate(x) >= 0.0;
    double maxmin = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < plus.size(); ++a) {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < minus.size(); ++b) m = std::min(m, atoms[a * minus.size() + b](x));
      maxmin = std::max(maxmin, m);
    }
    ++r.checks;
    if ((maxmin >= 0.0) != sign) fail(r, "sign mismatch at grid point " + std::to_string(i) + ": maxmin=" + fmt(maxmin));
  }
}

}  // namespace

PropertyReport run_property_suite(const PropertySuiteOptions& o) {
  PropertyReport report;
  if (o.trials == 0 && o.networks == 0) return report;
  std::mt19937_64 rng(o.seed);

  PropertyResult tables;
  tables.name = kPropMinMaxBoolean;
  auto t0 = Clock::now();
  check_minmax_tables(o, rng, tables);
  tables.seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  PropertyResult saddle;
  saddle.name = kPropSaddle;
  PropertyResult lemma;
  lemma.name = kPropLemma;
  PropertyResult flat;
  flat.name = kPropFlatTree;
  PropertyResult pm;
  pm.name = kPropSigmaPm;
  double t_op = 0.0, t_flat = 0.0, t_pm = 0.0;
  for (std::size_t k = 0; k < o.networks; ++k) {
    const NetCase c = make_case(rng, o);
    if (c.inputs.empty()) continue;
    auto a = Clock::now();
    check_operand(o, c, rng, saddle, lemma);
    auto b = Clock::now();
    check_flat_tree(o, c, flat);
    auto d = Clock::now();
    check_sigma_pm(o, c, pm);
    auto e = Clock::now();
    t_op += std::chrono::duration<double>(b - a).count();
    t_flat += std::chrono::duration<double>(d - b).count();
    t_pm += std::chrono::duration<double>(e - d).count();
  }
  saddle.seconds = lemma.seconds = t_op;
  flat.seconds = t_flat;
  pm.seconds = t_pm;
  if (o.trials > 0) report.results.push_back(std::move(tables));
  if (o.networks > 0) {
    report.results.push_back(std::move(saddle));
    report.results.push_back(std::move(lemma));
    report.results.push_back(std::move(flat));
    report.results.push_back(std::move(pm));
  }
  return report;
}

}  // namespace relucirc
