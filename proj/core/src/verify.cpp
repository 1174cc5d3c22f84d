#include "relucirc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <unordered_set>

#include "json_util.hpp"
#include "parallel.hpp"
#include "relucirc/circuit_eval.hpp"
#include "relucirc/error.hpp"

namespace relucirc {

bool Disagreement::attributable() const { return !state_enumerated || min_abs_preactivation <= 1e-9; }

namespace {

using detail::json;

json disagreement_json(const Disagreement& d) {
  json x = json::array();
  for (Eigen::Index i = 0; i < d.x.size(); ++i) x.push_back(d.x[i]);
  return json{{"x", std::move(x)},
              {"state", d.state.to_string()},
              {"network", d.network},
              {"circuit", d.circuit},
              {"state_enumerated", d.state_enumerated},
              {"min_abs_preactivation", d.min_abs_preactivation},
              {"fine_grid", d.fine_grid},
              {"attributable", d.attributable()}};
}

void check_inputs(const MlpParams& params, const CircuitTree& tree, const GridSpec& grid) {
  params.validate();
  tree.validate();
  grid.validate();
  if (grid.dim() != params.arch.input_dim || tree.input_dim() != params.arch.input_dim) {
    throw InputError("network, circuit and grid dimensions differ");
  }
}

struct Partial {
  std::uint64_t points = 0;
  std::uint64_t guaranteed = 0;
  double max_g = 0.0;
  double max_scaled = 0.0;
  double max_all = 0.0;
  std::uint64_t agree = 0;
  std::uint64_t unattributable = 0;
  std::vector<std::pair<std::uint64_t, Disagreement>> logged;
};

void keep_first(std::vector<std::pair<std::uint64_t, Disagreement>>& all, std::size_t limit) {
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (all.size() > limit) all.resize(limit);
}

}  // namespace

std::string EquivalenceReport::to_json() const {
  json j{{"mode", relucirc::to_string(mode)}, {"points", points}, {"pass", pass}, {"summary", summary}};
  if (mode == CircuitMode::kNumeric) {
    j["guaranteed_points"] = guaranteed_points;
    j["max_abs_diff_guaranteed"] = max_abs_diff_guaranteed;
    j["max_scaled_diff_guaranteed"] = max_scaled_diff_guaranteed;
    j["max_abs_diff_all"] = max_abs_diff_all;
  } else {
    j["agreeing_points"] = agreeing_points;
    j["agreement"] = agreement;
    j["fine_points"] = fine_points;
    j["fine_agreeing_points"] = fine_agreeing_points;
    j["fine_agreement"] = fine_agreement;
    j["unattributable"] = unattributable;
  }
  json d = json::array();
  for (const auto& x : disagreements) d.push_back(disagreement_json(x));
  j["disagreements"] = std::move(d);
  return j.dump(1);
}

EquivalenceReport verify_numeric(const MlpParams& params, const CircuitTree& tree, const GridSpec& grid,
                                 const VerifyOptions& options) {
  check_inputs(params, tree, grid);
  std::unordered_set<NetworkState, NetworkStateHash> indexed(tree.index_states().begin(), tree.index_states().end());
  const std::uint64_t total = grid.total_points();
  const std::size_t threads = detail::worker_count(options.threads, total, 1024);
  std::vector<Partial> parts(threads);
  detail::parallel_chunks(threads, total, [&](std::size_t t, std::uint64_t begin, std::uint64_t end) {
    Partial& p = parts[t];
    Evaluator net(params);
    TreeEvaluator ev(tree);
    NetworkState s;
    Vector x;
    for (std::uint64_t i = begin; i < end; ++i) {
      grid.point(i, x);
      double slack = 0.0;
      const double n = net.evaluate_with_slack(x, slack, &s);
      const double v = ev.numeric(x, &s);
      const double diff = std::abs(n - v);
      const double scaled = diff / std::max(1.0, std::abs(n));
      ++p.points;
      p.max_all = std::max(p.max_all, diff);
      // An empty index set (constant tree) guarantees nothing.
      const bool guaranteed = indexed.count(s) > 0;
      if (guaranteed) {
        ++p.guaranteed;
        p.max_g = std::max(p.max_g, diff);
        p.max_scaled = std::max(p.max_scaled, scaled);
      }
      if (scaled > options.numeric_tolerance && p.logged.size() < options.max_logged) {
        p.logged.push_back({i, Disagreement{x, s, n, v, guaranteed, slack, false}});
      }
    }
  });

  EquivalenceReport r;
  r.mode = CircuitMode::kNumeric;
  std::vector<std::pair<std::uint64_t, Disagreement>> logged;
  for (auto& p : parts) {
    r.points += p.points;
    r.guaranteed_points += p.guaranteed;
    r.max_abs_diff_guaranteed = std::max(r.max_abs_diff_guaranteed, p.max_g);
    r.max_scaled_diff_guaranteed = std::max(r.max_scaled_diff_guaranteed, p.max_scaled);
    r.max_abs_diff_all = std::max(r.max_abs_diff_all, p.max_all);
    for (auto& l : p.logged) logged.push_back(std::move(l));
  }
  keep_first(logged, options.max_logged);
  for (auto& l : logged) r.disagreements.push_back(std::move(l.second));
  r.pass = r.guaranteed_points > 0 && r.max_scaled_diff_guaranteed <= options.numeric_tolerance;
  r.summary = "numeric: " + std::to_string(r.guaranteed_points) + "/" + std::to_string(r.points) +
              " points with enumerated state, max |N - tree| = " + std::to_string(r.max_abs_diff_guaranteed) +
              (r.pass ? " (pass)" : " (FAIL)");
  return r;
}

namespace {

Partial logical_pass(const MlpParams& params, const CircuitTree& tree, const StateRegistry& registry,
                     const GridSpec& grid, bool fine, const VerifyOptions& options) {
  const std::uint64_t total = grid.total_points();
  const std::size_t threads = detail::worker_count(options.threads, total, 1 << 14);
  std::vector<Partial> parts(threads);
  detail::parallel_chunks(threads, total, [&](std::size_t t, std::uint64_t begin, std::uint64_t end) {
    Partial& p = parts[t];
    Evaluator net(params);
    TreeEvaluator ev(tree);
    NetworkState s;
    Vector x;
    const std::uint64_t chunk = 4096;
    Matrix pts(static_cast<Eigen::Index>(grid.dim()), static_cast<Eigen::Index>(chunk));
    std::vector<double> outputs(chunk);
    for (std::uint64_t start = begin; start < end; start += chunk) {
      const std::uint64_t stop = std::min(end, start + chunk);
      const auto count = static_cast<Eigen::Index>(stop - start);
      pts.conservativeResize(Eigen::NoChange, count);
      for (std::uint64_t i = start; i < stop; ++i) {
        grid.point(i, x);
        pts.col(static_cast<Eigen::Index>(i - start)) = x;
        outputs[i - start] = net.evaluate(x);
      }
      const auto values = ev.logical_batch(pts);
      for (std::uint64_t i = start; i < stop; ++i) {
        const auto k = static_cast<std::size_t>(i - start);
        const bool sign = outputs[k] >= 0.0;
        ++p.points;
        if ((values[k] != 0) == sign) {
          ++p.agree;
          continue;
        }
        double slack = 0.0;
        net.evaluate_with_slack(pts.col(static_cast<Eigen::Index>(k)), slack, &s);
        Disagreement d{pts.col(static_cast<Eigen::Index>(k)), s, outputs[k], values[k] ? 1.0 : 0.0,
                       registry.contains(s), slack, fine};
        if (!d.attributable()) ++p.unattributable;
        if (p.logged.size() < options.max_logged) p.logged.push_back({i, std::move(d)});
      }
    }
  });
  Partial all;
  for (auto& p : parts) {
    all.points += p.points;
    all.agree += p.agree;
    all.unattributable += p.unattributable;
    for (auto& l : p.logged) all.logged.push_back(std::move(l));
  }
  keep_first(all.logged, options.max_logged);
  return all;
}

}  // namespace

EquivalenceReport verify_logical(const MlpParams& params, const CircuitTree& tree, const StateRegistry& registry,
                                 const GridSpec& grid, std::size_t fine_factor, const VerifyOptions& options) {
  check_inputs(params, tree, grid);
  if (fine_factor == 0) throw InputError("fine factor must be positive");
  EquivalenceReport r;
  r.mode = CircuitMode::kLogical;
  Partial coarse = logical_pass(params, tree, registry, grid, false, options);
  r.points = coarse.points;
  r.agreeing_points = coarse.agree;
  r.agreement = r.points ? static_cast<double>(r.agreeing_points) / static_cast<double>(r.points) : 1.0;

  Partial fine_part;
  if (fine_factor > 1) {
    fine_part = logical_pass(params, tree, registry, grid.refined(fine_factor), true, options);
  } else {
    fine_part = coarse;
  }
  r.fine_points = fine_part.points;
  r.fine_agreeing_points = fine_part.agree;
  r.fine_agreement = r.fine_points ? static_cast<double>(r.fine_agreeing_points) / static_cast<double>(r.fine_points) : 1.0;
  r.unattributable = fine_part.unattributable;
  if (fine_factor > 1) r.unattributable += coarse.unattributable;

  for (auto& l : coarse.logged) r.disagreements.push_back(std::move(l.second));
  for (auto& l : fine_part.logged) {
    if (r.disagreements.size() >= options.max_logged) break;
    if (fine_factor > 1) r.disagreements.push_back(std::move(l.second));
  }
  r.pass = r.agreeing_points == r.points && r.fine_agreement >= options.fine_min_agreement && r.unattributable == 0;
  char buf[256];
  std::snprintf(buf, sizeof buf, "logical: agreement %.6f on %llu grid points, %.6f on %llu fine points, %llu unattributable%s",
                r.agreement, static_cast<unsigned long long>(r.points), r.fine_agreement,
                static_cast<unsigned long long>(r.fine_points), static_cast<unsigned long long>(r.unattributable),
                r.pass ? " (pass)" : " (FAIL)");
  r.summary = buf;
  return r;
}

void write_report(const EquivalenceReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << report.to_json() << '\n';
}

}  // namespace relucirc
