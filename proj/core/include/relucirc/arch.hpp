#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace relucirc {

/// Shape of a fully-connected ReLU binary classifier: `input_dim` inputs,
/// `hidden_widths.size()` hidden ReLU layers and one linear output unit.
///
/// Layer indices follow the usual convention: 0 is the input, 1..d are the
/// hidden layers and d+1 is the scalar output.
struct ArchSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_widths;

  std::size_t depth() const noexcept { return hidden_widths.size(); }

  /// Width of layer `l` for l in [0, d+1].
  std::size_t width(std::size_t layer) const;

  /// Offset of hidden layer `l` (1-based) inside a concatenated state vector.
  std::size_t state_offset(std::size_t layer) const;

  /// Sum of hidden widths: the length of a network state.
  std::size_t hidden_neuron_count() const noexcept;

  /// Sum over l of w_{l+1} (w_l + 1).
  std::size_t parameter_count() const noexcept;

  /// Throws InputError unless d >= 1 and every width is positive.
  void validate() const;

  std::string to_string() const;

  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

}  // namespace relucirc
