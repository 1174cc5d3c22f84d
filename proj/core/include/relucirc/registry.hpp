#pragma once

#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

#include "relucirc/grid.hpp"
#include "relucirc/mlp.hpp"

namespace relucirc {

/// Realized network states with the output signs they were seen with.
///
/// sigma_plus() holds states seen with N(x) >= 0, sigma_minus() those seen
/// with N(x) < 0, sigma_bar() their union and sigma_zero() their
/// intersection (the boundary states). Every state keeps the first input
/// that produced it.
class StateRegistry {
 public:
  struct Entry {
    NetworkState state;
    bool nonneg = false;
    bool neg = false;
    Vector representative;
  };

  StateRegistry() = default;
  explicit StateRegistry(ArchSpec arch) : arch_(std::move(arch)) {}

  const ArchSpec& arch() const noexcept { return arch_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// Records one evaluation. The representative is only stored on first sight.
  void add(const NetworkState& state, double output, const Eigen::Ref<const Vector>& x);
  /// Adds a state with explicit flags (used when reading files and merging).
  void add_flags(const NetworkState& state, bool nonneg, bool neg, const Vector& representative);

  const Entry* find(const NetworkState& state) const;
  bool contains(const NetworkState& state) const { return find(state) != nullptr; }

  /// Union of states, OR of flags. Representatives of states already present
  /// here are kept.
  void merge(const StateRegistry& other);

  /// State lists in ascending bit order.
  std::vector<NetworkState> sigma_bar() const;
  std::vector<NetworkState> sigma_plus() const;
  std::vector<NetworkState> sigma_minus() const;
  std::vector<NetworkState> sigma_zero() const;
  std::size_t boundary_count() const;

  /// Same states and flags (representatives are ignored).
  bool same_states(const StateRegistry& other) const;

  /// Throws InputError if some representative no longer reproduces its state.
  void check_representatives(const MlpParams& params) const;

 private:
  ArchSpec arch_;
  std::vector<Entry> entries_;
  std::unordered_map<NetworkState, std::size_t, NetworkStateHash> index_;
};

struct EnumerateOptions {
  std::uint64_t point_budget = 100'000'000;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

/// Evaluates the network at every grid point and registers each state with
/// its output sign. Throws ResourceError if the grid exceeds the budget.
StateRegistry enumerate_states(const MlpParams& params, const GridSpec& grid,
                               const EnumerateOptions& options = {});

/// For every pair of grid neighbours whose outputs have opposite signs,
/// bisects the segment 40 times and registers the states found 1e-9 cell
/// sizes to either side of the crossing. Returns the enlarged registry.
StateRegistry refine_boundary(const MlpParams& params, const StateRegistry& registry, const GridSpec& grid,
                              const EnumerateOptions& options = {});

/// Crossing point of an edge with opposite output signs at `a` and `b`,
/// located by `iterations` bisection steps.
Vector bisect_sign_change(Evaluator& eval, const Vector& a, const Vector& b, int iterations = 40);

enum class ProjectionSource { kFull, kBoundary };

/// States restricted to a set of hidden layers, deduplicated.
struct LayerProjection {
  std::vector<std::size_t> layers;        // sorted, 1-based
  std::vector<NetworkState> source;       // states that were projected
  std::vector<BitVector> projected;       // distinct projections, ascending
  std::vector<std::size_t> of_source;     // projected index for each source state
  std::vector<std::vector<std::size_t>> back_refs;  // source indices for each projection
};

LayerProjection project(const StateRegistry& registry, std::vector<std::size_t> layers,
                        ProjectionSource source = ProjectionSource::kFull);
LayerProjection project(const ArchSpec& arch, const std::vector<NetworkState>& states,
                        std::vector<std::size_t> layers);

/// CSV `state,nonneg,neg,x0,x1,...` with representatives in hex floats.
void write_states_csv(const StateRegistry& registry, const std::filesystem::path& path);
StateRegistry read_states_csv(const ArchSpec& arch, const std::filesystem::path& path);

}  // namespace relucirc
