#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "relucirc/arch.hpp"
#include "relucirc/bitvector.hpp"

namespace relucirc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dataset;

/// Weights and biases of a fully-connected ReLU network.
///
/// weights[l] maps layer l to layer l+1 (shape w_{l+1} x w_l) and biases[l]
/// is added to its output, for l = 0..d. The last pair is the linear readout.
struct MlpParams {
  ArchSpec arch;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static MlpParams zeros(const ArchSpec& arch);

  /// Throws InputError on shape mismatch or non-finite entries.
  void validate() const;
};

/// Binary on/off pattern of every hidden neuron, layer 1 first.
/// The output unit's sign is not part of the state.
struct NetworkState {
  BitVector bits;

  /// Bits of hidden layer `layer` (1-based).
  BitVector layer(const ArchSpec& arch, std::size_t layer) const {
    return bits.slice(arch.state_offset(layer), arch.width(layer));
  }

  std::string to_string() const { return bits.to_string(); }

  friend bool operator==(const NetworkState&, const NetworkState&) = default;
  friend auto operator<=>(const NetworkState& a, const NetworkState& b) { return a.bits <=> b.bits; }
};

struct NetworkStateHash {
  std::size_t operator()(const NetworkState& s) const noexcept { return BitVectorHash{}(s.bits); }
};

/// Everything a forward pass produces. preactivations[l-1] holds Net^l(x)
/// for hidden layer l; the output preactivation is `output`.
struct ForwardTrace {
  std::vector<Vector> preactivations;
  double output = 0.0;
  NetworkState state;
};

/// Exact forward pass with state capture. A neuron is "on" when its
/// preactivation is >= 0, so an exact zero counts as on.
ForwardTrace forward(const MlpParams& params, const Eigen::Ref<const Vector>& x);

/// Allocation-free evaluator for hot loops (grid scans, verification).
class Evaluator {
 public:
  explicit Evaluator(const MlpParams& params);

  /// Returns N(x) and writes the state into `state` when non-null.
  double evaluate(const Eigen::Ref<const Vector>& x, NetworkState* state = nullptr);

  /// Returns N(x) and the smallest |preactivation| over hidden neurons.
  double evaluate_with_slack(const Eigen::Ref<const Vector>& x, double& min_abs_preactivation,
                             NetworkState* state = nullptr);

  const MlpParams& params() const noexcept { return *params_; }

 private:
  const MlpParams* params_;
  std::vector<Vector> buffers_;
};

/// Splits M into entrywise nonnegative parts with M = M+ - M-.
std::pair<Matrix, Matrix> split_signs(const Matrix& m);

/// min_i y~_i N(x_i) with y~ in {-1, +1}. Throws InputError on empty data.
double margin(const MlpParams& params, const Dataset& data);

/// An affine map z = W x + b, used for the linear bottleneck in front of an MLP.
struct AffineMap {
  Matrix weight;
  Vector bias;

  Vector apply(const Eigen::Ref<const Vector>& x) const { return weight * x + bias; }
};

/// An MLP optionally preceded by a linear (no ReLU) bottleneck layer. All
/// states, grids and circuits live in the bottleneck coordinates.
struct Model {
  std::optional<AffineMap> bottleneck;
  MlpParams mlp;

  std::size_t input_dim() const {
    return bottleneck ? static_cast<std::size_t>(bottleneck->weight.cols()) : mlp.arch.input_dim;
  }
  Vector to_circuit_coordinates(const Eigen::Ref<const Vector>& x) const {
    return bottleneck ? bottleneck->apply(x) : Vector(x);
  }
  double output(const Eigen::Ref<const Vector>& x) const;
};

}  // namespace relucirc
