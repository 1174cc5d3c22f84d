#include "relucirc/registry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "parallel.hpp"
#include "relucirc/error.hpp"

namespace relucirc {

void StateRegistry::add(const NetworkState& state, double output, const Eigen::Ref<const Vector>& x) {
  auto [it, inserted] = index_.try_emplace(state, entries_.size());
  if (inserted) entries_.push_back(Entry{state, false, false, Vector(x)});
  Entry& e = entries_[it->second];
  if (output >= 0.0) {
    e.nonneg = true;
  } else {
    e.neg = true;
  }
}

void StateRegistry::add_flags(const NetworkState& state, bool nonneg, bool neg, const Vector& representative) {
  auto [it, inserted] = index_.try_emplace(state, entries_.size());
  if (inserted) entries_.push_back(Entry{state, false, false, representative});
  Entry& e = entries_[it->second];
  e.nonneg = e.nonneg || nonneg;
  e.neg = e.neg || neg;
}

const StateRegistry::Entry* StateRegistry::find(const NetworkState& state) const {
  auto it = index_.find(state);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

void StateRegistry::merge(const StateRegistry& other) {
  if (entries_.empty() && arch_.hidden_widths.empty()) arch_ = other.arch_;
  for (const Entry& e : other.entries_) add_flags(e.state, e.nonneg, e.neg, e.representative);
}

namespace {

template <typename Pred>
std::vector<NetworkState> collect(const std::vector<StateRegistry::Entry>& entries, Pred pred) {
  std::vector<NetworkState> out;
  for (const auto& e : entries) {
    if (pred(e)) out.push_back(e.state);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<NetworkState> StateRegistry::sigma_bar() const {
  return collect(entries_, [](const Entry&) { return true; });
}
std::vector<NetworkState> StateRegistry::sigma_plus() const {
  return collect(entries_, [](const Entry& e) { return e.nonneg; });
}
std::vector<NetworkState> StateRegistry::sigma_minus() const {
  return collect(entries_, [](const Entry& e) { return e.neg; });
}
std::vector<NetworkState> StateRegistry::sigma_zero() const {
  return collect(entries_, [](const Entry& e) { return e.nonneg && e.neg; });
}

std::size_t StateRegistry::boundary_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const Entry& e) { return e.nonneg && e.neg; }));
}

bool StateRegistry::same_states(const StateRegistry& other) const {
  if (size() != other.size()) return false;
  for (const Entry& e : entries_) {
    const Entry* o = other.find(e.state);
    if (o == nullptr || o->nonneg != e.nonneg || o->neg != e.neg) return false;
  }
  return true;
}

void StateRegistry::check_representatives(const MlpParams& params) const {
  Evaluator eval(params);
  NetworkState s;
  for (const Entry& e : entries_) {
    eval.evaluate(e.representative, &s);
    if (s != e.state) {
      throw InputError("representative input does not reproduce state " + e.state.to_string());
    }
  }
}

namespace {

std::size_t thread_count(const EnumerateOptions& options, std::uint64_t work) {
  return detail::worker_count(options.threads, work);
}

using detail::parallel_chunks;

}  // namespace

StateRegistry enumerate_states(const MlpParams& params, const GridSpec& grid, const EnumerateOptions& options) {
  params.validate();
  grid.validate();
  if (grid.dim() != params.arch.input_dim) throw InputError("grid dimension does not match network input");
  const std::uint64_t total = grid.total_points();
  if (total > options.point_budget) {
    throw ResourceError("grid has " + std::to_string(total) + " points, budget is " +
                        std::to_string(options.point_budget));
  }
  const std::size_t threads = thread_count(options, total);
  std::vector<StateRegistry> parts(threads, StateRegistry(params.arch));
  parallel_chunks(threads, total, [&](std::size_t t, std::uint64_t begin, std::uint64_t end) {
    Evaluator eval(params);
    NetworkState s;
    Vector x;
    for (std::uint64_t i = begin; i < end; ++i) {
      grid.point(i, x);
      const double y = eval.evaluate(x, &s);
      parts[t].add(s, y, x);
    }
  });
  StateRegistry out(params.arch);
  for (const auto& p : parts) out.merge(p);
  return out;
}

Vector bisect_sign_change(Evaluator& eval, const Vector& a, const Vector& b, int iterations) {
  Vector lo = a;
  Vector hi = b;
  const bool lo_sign = eval.evaluate(lo) >= 0.0;
  Vector mid(a.size());
  for (int it = 0; it < iterations; ++it) {
    mid = 0.5 * (lo + hi);
    if ((eval.evaluate(mid) >= 0.0) == lo_sign) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

StateRegistry refine_boundary(const MlpParams& params, const StateRegistry& registry, const GridSpec& grid,
                              const EnumerateOptions& options) {
  params.validate();
  grid.validate();
  if (grid.dim() != params.arch.input_dim) throw InputError("grid dimension does not match network input");
  const std::uint64_t total = grid.total_points();
  if (total > options.point_budget) {
    throw ResourceError("grid has " + std::to_string(total) + " points, budget is " +
                        std::to_string(options.point_budget));
  }

  // One sign bit per lattice point.
  std::vector<std::uint64_t> sign((total + 63) / 64, 0);
  const std::size_t threads = thread_count(options, total);
  {
    // Chunk boundaries aligned to whole words so threads never share one.
    const std::uint64_t words = sign.size();
    parallel_chunks(threads, words, [&](std::size_t, std::uint64_t wb, std::uint64_t we) {
      Evaluator eval(params);
      Vector x;
      const std::uint64_t end = std::min(total, we * 64);
      for (std::uint64_t i = wb * 64; i < end; ++i) {
        grid.point(i, x);
        if (eval.evaluate(x) >= 0.0) sign[i >> 6] |= std::uint64_t{1} << (i & 63);
      }
    });
  }
  auto positive = [&](std::uint64_t i) { return (sign[i >> 6] >> (i & 63)) & 1u; };

  std::vector<std::uint64_t> stride(grid.dim(), 1);
  for (std::size_t a = 1; a < grid.dim(); ++a) stride[a] = stride[a - 1] * grid.resolution[a - 1];

  std::vector<StateRegistry> parts(threads, StateRegistry(params.arch));
  parallel_chunks(threads, total, [&](std::size_t t, std::uint64_t begin, std::uint64_t end) {
    Evaluator eval(params);
    NetworkState s;
    Vector xa, xb;
    for (std::uint64_t i = begin; i < end; ++i) {
      std::uint64_t rest = i;
      for (std::size_t a = 0; a < grid.dim(); ++a) {
        const std::uint64_t k = rest % grid.resolution[a];
        rest /= grid.resolution[a];
        if (k + 1 == grid.resolution[a]) continue;
        const std::uint64_t j = i + stride[a];
        if (positive(i) == positive(j)) continue;
        grid.point(i, xa);
        grid.point(j, xb);
        const Vector xs = bisect_sign_change(eval, xa, xb);
        const Vector dir = (xb - xa).normalized();
        const double delta = 1e-9 * grid.cell_size(a);
        for (double side : {-1.0, 1.0}) {
          const Vector x = xs + side * delta * dir;
          const double y = eval.evaluate(x, &s);
          parts[t].add(s, y, x);
        }
      }
    }
  });

  StateRegistry out = registry;
  for (const auto& p : parts) out.merge(p);
  return out;
}

LayerProjection project(const ArchSpec& arch, const std::vector<NetworkState>& states,
                        std::vector<std::size_t> layers) {
  if (layers.empty()) throw InputError("projection needs at least one layer");
  std::sort(layers.begin(), layers.end());
  layers.erase(std::unique(layers.begin(), layers.end()), layers.end());
  for (auto l : layers) {
    if (l < 1 || l > arch.depth()) throw InputError("projection layer " + std::to_string(l) + " out of range");
  }

  LayerProjection out;
  out.layers = layers;
  out.source = states;
  std::vector<BitVector> keys;
  keys.reserve(states.size());
  for (const auto& s : states) {
    if (s.bits.size() != arch.hidden_neuron_count()) throw InputError("state length does not match architecture");
    BitVector key;
    for (auto l : layers) key.append(s.layer(arch, l));
    keys.push_back(std::move(key));
  }
  out.projected = keys;
  std::sort(out.projected.begin(), out.projected.end());
  out.projected.erase(std::unique(out.projected.begin(), out.projected.end()), out.projected.end());
  out.back_refs.resize(out.projected.size());
  out.of_source.reserve(states.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto it = std::lower_bound(out.projected.begin(), out.projected.end(), keys[i]);
    const auto p = static_cast<std::size_t>(it - out.projected.begin());
    out.of_source.push_back(p);
    out.back_refs[p].push_back(i);
  }
  return out;
}

LayerProjection project(const StateRegistry& registry, std::vector<std::size_t> layers, ProjectionSource source) {
  return project(registry.arch(),
                 source == ProjectionSource::kFull ? registry.sigma_bar() : registry.sigma_zero(),
                 std::move(layers));
}

void write_states_csv(const StateRegistry& registry, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  const std::size_t dim = registry.entries().empty() ? 0 : static_cast<std::size_t>(registry.entries()[0].representative.size());
  out << "state,nonneg,neg";
  for (std::size_t j = 0; j < dim; ++j) out << ",x" << j;
  out << '\n';
  std::vector<const StateRegistry::Entry*> rows;
  for (const auto& e : registry.entries()) rows.push_back(&e);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->state < b->state; });
  char buf[64];
  for (const auto* e : rows) {
    out << e->state.to_string() << ',' << int{e->nonneg} << ',' << int{e->neg};
    for (Eigen::Index j = 0; j < e->representative.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%a", e->representative[j]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

StateRegistry read_states_csv(const ArchSpec& arch, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("state,nonneg,neg", 0) != 0) {
    throw FormatError(path.string() + ": missing states header");
  }
  StateRegistry reg(arch);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 3) throw FormatError(path.string() + ": row " + std::to_string(row) + " too short");
    NetworkState s;
    try {
      s.bits = BitVector::from_string(cells[0]);
    } catch (const InputError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
    if (s.bits.size() != arch.hidden_neuron_count()) {
      throw FormatError(path.string() + ": state length does not match architecture");
    }
    Vector rep(static_cast<Eigen::Index>(cells.size() - 3));
    for (std::size_t j = 3; j < cells.size(); ++j) {
      char* end = nullptr;
      rep[static_cast<Eigen::Index>(j - 3)] = std::strtod(cells[j].c_str(), &end);
      if (end == cells[j].c_str()) throw FormatError(path.string() + ": bad coordinate");
    }
    reg.add_flags(s, cells[1] == "1", cells[2] == "1", rep);
  }
  return reg;
}

}  // namespace relucirc
