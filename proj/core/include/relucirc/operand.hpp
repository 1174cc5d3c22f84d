#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "relucirc/mlp.hpp"

namespace relucirc {

/// Affine functional x -> v.(x, 1): coefficients first, constant last.
struct AffineAtom {
  Vector v;

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(v.size()) - 1; }
  double constant() const { return v[v.size() - 1]; }
  double operator()(const Eigen::Ref<const Vector>& x) const {
    return v.head(v.size() - 1).dot(x) + v[v.size() - 1];
  }
};

/// F^d(mu, tau, .) as an affine functional of x. The recursion
///
///   F^0         = b^0 + W^0 x
///   F^l(mu,tau) = b^l + W^l_+ diag(mu^l) F^{l-1}(mu,tau) - W^l_- diag(tau^l) F^{l-1}(tau,mu)
///
/// is carried out on (coefficient, constant) rows, keeping both
/// orientations at every layer. With mu = tau = state of x the atom
/// evaluates to N(x).
AffineAtom net_operand_atom(const MlpParams& params, const NetworkState& mu, const NetworkState& tau);

/// (F^d(mu,tau), F^d(tau,mu)) from one pass of the recursion.
std::pair<AffineAtom, AffineAtom> net_operand_pair(const MlpParams& params, const NetworkState& mu,
                                                   const NetworkState& tau);

using OperandFn = std::function<AffineAtom(const MlpParams&, const NetworkState&, const NetworkState&)>;

/// All |S|^2 atoms for a sorted, duplicate-free state list, stored row-major:
/// atom (i, j) = F^d(S[i], S[j]) occupies entries [(i*n + j)*(w0+1), +w0+1).
/// Shares the layer-1..l part of the recursion between states with a common
/// prefix, so the cost is far below |S|^2 independent recursions.
std::vector<double> all_pair_atoms(const MlpParams& params, std::span<const NetworkState> sorted_states);

}  // namespace relucirc
