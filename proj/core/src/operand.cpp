#include "relucirc/operand.hpp"

#include <algorithm>

#include "relucirc/error.hpp"

namespace relucirc {

namespace {

void check_state(const MlpParams& params, const NetworkState& s) {
  if (s.bits.size() != params.arch.hidden_neuron_count()) {
    throw InputError("state has " + std::to_string(s.bits.size()) + " bits, network has " +
                     std::to_string(params.arch.hidden_neuron_count()) + " hidden neurons");
  }
}

// Rows of F^0: [W^0 | b^0].
Matrix base_operand(const MlpParams& p) {
  const Eigen::Index n = p.weights[0].rows();
  const Eigen::Index k = p.weights[0].cols();
  Matrix f(n, k + 1);
  f.leftCols(k) = p.weights[0];
  f.col(k) = p.biases[0];
  return f;
}

// One recursion step for hidden layer `layer` (1-based), gate bits given as 0/1 vectors.
void step(const Matrix& wp, const Matrix& wn, const Vector& bias, const Vector& mu, const Vector& tau,
          const Matrix& f_mt, const Matrix& f_tm, Matrix& out_mt, Matrix& out_tm) {
  const Eigen::Index c = f_mt.cols() - 1;
  out_mt.noalias() = wp * (mu.asDiagonal() * f_mt);
  out_mt.noalias() -= wn * (tau.asDiagonal() * f_tm);
  out_mt.col(c) += bias;
  out_tm.noalias() = wp * (tau.asDiagonal() * f_tm);
  out_tm.noalias() -= wn * (mu.asDiagonal() * f_mt);
  out_tm.col(c) += bias;
}

Vector gate(const MlpParams& p, const NetworkState& s, std::size_t layer) {
  const std::size_t off = p.arch.state_offset(layer);
  const std::size_t w = p.arch.width(layer);
  Vector g(static_cast<Eigen::Index>(w));
  for (std::size_t i = 0; i < w; ++i) g[static_cast<Eigen::Index>(i)] = s.bits.get(off + i) ? 1.0 : 0.0;
  return g;
}

struct SplitWeights {
  std::vector<Matrix> pos;
  std::vector<Matrix> neg;
};

SplitWeights split_all(const MlpParams& p) {
  SplitWeights s;
  for (std::size_t l = 1; l < p.weights.size(); ++l) {
    auto [wp, wn] = split_signs(p.weights[l]);
    s.pos.push_back(std::move(wp));
    s.neg.push_back(std::move(wn));
  }
  return s;
}

}  // namespace

std::pair<AffineAtom, AffineAtom> net_operand_pair(const MlpParams& params, const NetworkState& mu,
                                                   const NetworkState& tau) {
  check_state(params, mu);
  check_state(params, tau);
  const SplitWeights sw = split_all(params);
  Matrix f_mt = base_operand(params);
  Matrix f_tm = f_mt;
  Matrix n_mt, n_tm;
  for (std::size_t l = 1; l <= params.arch.depth(); ++l) {
    step(sw.pos[l - 1], sw.neg[l - 1], params.biases[l], gate(params, mu, l), gate(params, tau, l), f_mt, f_tm,
         n_mt, n_tm);
    std::swap(f_mt, n_mt);
    std::swap(f_tm, n_tm);
  }
  return {AffineAtom{f_mt.row(0).transpose()}, AffineAtom{f_tm.row(0).transpose()}};
}

AffineAtom net_operand_atom(const MlpParams& params, const NetworkState& mu, const NetworkState& tau) {
  return net_operand_pair(params, mu, tau).first;
}

namespace {

struct PairDfs {
  const MlpParams& p;
  std::span<const NetworkState> states;
  SplitWeights sw;
  std::vector<Matrix> gate_cols;  // gate_cols[layer-1]: one 0/1 column per state
  std::size_t n;
  std::size_t stride;
  std::vector<double>& out;

  // Half-open state ranges sharing layers 1..layer-1; split by the bits of `layer`.
  std::vector<std::pair<std::size_t, std::size_t>> groups(std::size_t lo, std::size_t hi, std::size_t layer) const {
    std::vector<std::pair<std::size_t, std::size_t>> g;
    const std::size_t off = p.arch.state_offset(layer);
    const std::size_t w = p.arch.width(layer);
    std::size_t start = lo;
    for (std::size_t i = lo + 1; i <= hi; ++i) {
      bool same = i < hi;
      for (std::size_t b = 0; same && b < w; ++b) same = states[i].bits.get(off + b) == states[start].bits.get(off + b);
      if (!same) {
        g.emplace_back(start, i);
        start = i;
      }
    }
    return g;
  }

  void visit(std::size_t layer, std::size_t mlo, std::size_t mhi, std::size_t tlo, std::size_t thi,
             const Matrix& f_mt, const Matrix& f_tm) {
    const auto gm = groups(mlo, mhi, layer);
    const auto gt = groups(tlo, thi, layer);
    Matrix n_mt, n_tm;
    for (const auto& [a0, a1] : gm) {
      const Vector mu = gate_cols[layer - 1].col(static_cast<Eigen::Index>(a0));
      for (const auto& [b0, b1] : gt) {
        const Vector tau = gate_cols[layer - 1].col(static_cast<Eigen::Index>(b0));
        step(sw.pos[layer - 1], sw.neg[layer - 1], p.biases[layer], mu, tau, f_mt, f_tm, n_mt, n_tm);
        if (layer == p.arch.depth()) {
          // States are unique, so each group is a single state here.
          double* dst = out.data() + (a0 * n + b0) * stride;
          for (std::size_t k = 0; k < stride; ++k) dst[k] = n_mt(0, static_cast<Eigen::Index>(k));
        } else {
          visit(layer + 1, a0, a1, b0, b1, n_mt, n_tm);
        }
      }
    }
  }
};

}  // namespace

std::vector<double> all_pair_atoms(const MlpParams& params, std::span<const NetworkState> sorted_states) {
  params.validate();
  for (std::size_t i = 0; i < sorted_states.size(); ++i) {
    check_state(params, sorted_states[i]);
    if (i > 0 && !(sorted_states[i - 1] < sorted_states[i])) {
      throw InputError("all_pair_atoms needs sorted, duplicate-free states");
    }
  }
  const std::size_t n = sorted_states.size();
  const std::size_t stride = params.arch.input_dim + 1;
  std::vector<double> out(n * n * stride);
  if (n == 0) return out;

  PairDfs dfs{params, sorted_states, split_all(params), {}, n, stride, out};
  for (std::size_t l = 1; l <= params.arch.depth(); ++l) {
    Matrix g(static_cast<Eigen::Index>(params.arch.width(l)), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) g.col(static_cast<Eigen::Index>(i)) = gate(params, sorted_states[i], l);
    dfs.gate_cols.push_back(std::move(g));
  }
  const Matrix f0 = base_operand(params);
  dfs.visit(1, 0, n, 0, n, f0, f0);
  return out;
}

}  // namespace relucirc
