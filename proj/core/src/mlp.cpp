#include "relucirc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relucirc/dataset.hpp"
#include "relucirc/error.hpp"

namespace relucirc {

MlpParams MlpParams::zeros(const ArchSpec& arch) {
  arch.validate();
  MlpParams p;
  p.arch = arch;
  for (std::size_t l = 0; l <= arch.depth(); ++l) {
    auto rows = static_cast<Eigen::Index>(arch.width(l + 1));
    auto cols = static_cast<Eigen::Index>(arch.width(l));
    p.weights.push_back(Matrix::Zero(rows, cols));
    p.biases.push_back(Vector::Zero(rows));
  }
  return p;
}

void MlpParams::validate() const {
  arch.validate();
  const std::size_t d = arch.depth();
  if (weights.size() != d + 1 || biases.size() != d + 1) {
    throw InputError("expected " + std::to_string(d + 1) + " weight/bias pairs");
  }
  for (std::size_t l = 0; l <= d; ++l) {
    const auto rows = static_cast<Eigen::Index>(arch.width(l + 1));
    const auto cols = static_cast<Eigen::Index>(arch.width(l));
    if (weights[l].rows() != rows || weights[l].cols() != cols || biases[l].size() != rows) {
      throw InputError("layer " + std::to_string(l) + " has inconsistent shape");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw InputError("layer " + std::to_string(l) + " has non-finite entries");
    }
  }
}

namespace {

void check_input(const MlpParams& params, Eigen::Index n) {
  if (static_cast<std::size_t>(n) != params.arch.input_dim) {
    throw InputError("input has dimension " + std::to_string(n) + ", network expects " +
                     std::to_string(params.arch.input_dim));
  }
}

}  // namespace

ForwardTrace forward(const MlpParams& params, const Eigen::Ref<const Vector>& x) {
  check_input(params, x.size());
  const std::size_t d = params.arch.depth();
  ForwardTrace trace;
  trace.state.bits = BitVector(params.arch.hidden_neuron_count());
  trace.preactivations.reserve(d);
  std::size_t bit = 0;
  Vector a = x;
  for (std::size_t l = 0; l < d; ++l) {
    Vector z = params.weights[l] * a + params.biases[l];
    for (Eigen::Index i = 0; i < z.size(); ++i) trace.state.bits.set(bit++, z[i] >= 0.0);
    a = z.cwiseMax(0.0);
    trace.preactivations.push_back(std::move(z));
  }
  trace.output = (params.weights[d] * a + params.biases[d])[0];
  return trace;
}

Evaluator::Evaluator(const MlpParams& params) : params_(&params) {
  buffers_.reserve(params.arch.depth() + 1);
  for (std::size_t l = 1; l <= params.arch.depth() + 1; ++l) {
    buffers_.emplace_back(static_cast<Eigen::Index>(params.arch.width(l)));
  }
}

double Evaluator::evaluate(const Eigen::Ref<const Vector>& x, NetworkState* state) {
  double slack = 0.0;
  return evaluate_with_slack(x, slack, state);
}

double Evaluator::evaluate_with_slack(const Eigen::Ref<const Vector>& x, double& min_abs_preactivation,
                                      NetworkState* state) {
  const MlpParams& p = *params_;
  check_input(p, x.size());
  const std::size_t d = p.arch.depth();
  if (state != nullptr && state->bits.size() != p.arch.hidden_neuron_count()) {
    state->bits = BitVector(p.arch.hidden_neuron_count());
  }
  double slack = std::numeric_limits<double>::infinity();
  std::size_t bit = 0;
  for (std::size_t l = 0; l < d; ++l) {
    Vector& z = buffers_[l];
    if (l == 0) {
      z.noalias() = p.weights[0] * x;
    } else {
      z.noalias() = p.weights[l] * buffers_[l - 1];
    }
    z += p.biases[l];
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double v = z[i];
      slack = std::min(slack, std::abs(v));
      if (state != nullptr) state->bits.set(bit++, v >= 0.0);
      if (v < 0.0) z[i] = 0.0;
    }
  }
  min_abs_preactivation = slack;
  Vector& out = buffers_[d];
  out.noalias() = p.weights[d] * buffers_[d - 1];
  return out[0] + p.biases[d][0];
}

std::pair<Matrix, Matrix> split_signs(const Matrix& m) {
  return {m.cwiseMax(0.0), (-m).cwiseMax(0.0)};
}

double margin(const MlpParams& params, const Dataset& data) {
  if (data.size() == 0) throw InputError("margin of an empty dataset");
  Evaluator eval(params);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data.labels[i] != 0 ? 1.0 : -1.0;
    best = std::min(best, y * eval.evaluate(data.point(i)));
  }
  return best;
}

double Model::output(const Eigen::Ref<const Vector>& x) const {
  return forward(mlp, to_circuit_coordinates(x)).output;
}

}  // namespace relucirc
