#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "relucirc/circuit.hpp"

namespace relucirc {

/// Evaluates one circuit at many inputs. Holds scratch buffers, so use one
/// evaluator per thread.
class TreeEvaluator {
 public:
  explicit TreeEvaluator(const CircuitTree& tree);

  /// Exact max/min value by alpha-beta search. When `hint` is the state of x
  /// the children matching it are searched first, which by the saddle
  /// property of the operand tends to prune almost everything else.
  double numeric(const Eigen::Ref<const Vector>& x, const NetworkState* hint = nullptr);
  double numeric(std::uint32_t node, const Eigen::Ref<const Vector>& x, const NetworkState* hint = nullptr);

  /// Plain recursive max/min over every leaf; slow reference path.
  double numeric_exhaustive(std::uint32_t node, const Eigen::Ref<const Vector>& x) const;

  /// OR/AND of [atom(x) >= 0] with short-circuiting.
  bool logical(const Eigen::Ref<const Vector>& x, const NetworkState* hint = nullptr);
  bool logical(std::uint32_t node, const Eigen::Ref<const Vector>& x, const NetworkState* hint = nullptr);

  /// Boolean value at each column of `points`, 64 points per pass.
  std::vector<std::uint8_t> logical_batch(const Matrix& points);
  std::vector<std::uint8_t> logical_batch(std::uint32_t node, const Matrix& points);

  /// Same as logical_batch but packed: bit i of word i/64.
  std::vector<std::uint64_t> truth_bits(std::uint32_t node, const Matrix& points);

  /// Number of leaf evaluations since construction.
  std::uint64_t leaf_evaluations() const noexcept { return leaf_evals_; }

  const CircuitTree& tree() const noexcept { return *tree_; }

 private:
  void set_hint(const NetworkState* hint);
  double alphabeta(std::uint32_t node, double alpha, double beta);
  bool short_circuit(std::uint32_t node);
  std::uint64_t block(std::uint32_t node, std::uint64_t active);

  const CircuitTree* tree_;
  std::size_t depth_ = 0;  // number of hidden layers seen in labels
  std::vector<std::unordered_map<BitVector, std::uint32_t, BitVectorHash>> label_ids_;  // per layer
  std::vector<std::uint32_t> hint_;  // label id per layer, kNoLabel if none
  std::vector<std::size_t> layer_width_;
  const double* x_ = nullptr;
  Vector xbuf_;
  std::vector<double> block_points_;  // dim x 64, column-major
  std::vector<double> block_values_;
  std::uint64_t leaf_evals_ = 0;
};

/// Convenience wrappers (construct a temporary evaluator).
double eval_numeric(const CircuitTree& tree, const Eigen::Ref<const Vector>& x);
bool eval_logical(const CircuitTree& tree, const Eigen::Ref<const Vector>& x);

}  // namespace relucirc
