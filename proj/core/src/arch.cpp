#include "relucirc/arch.hpp"

#include <sstream>

#include "relucirc/error.hpp"

namespace relucirc {

std::size_t ArchSpec::width(std::size_t layer) const {
  if (layer == 0) return input_dim;
  if (layer <= depth()) return hidden_widths[layer - 1];
  if (layer == depth() + 1) return 1;
  throw InputError("layer index " + std::to_string(layer) + " out of range");
}

std::size_t ArchSpec::state_offset(std::size_t layer) const {
  if (layer < 1 || layer > depth()) {
    throw InputError("hidden layer index " + std::to_string(layer) + " out of range");
  }
  std::size_t offset = 0;
  for (std::size_t l = 1; l < layer; ++l) offset += hidden_widths[l - 1];
  return offset;
}

std::size_t ArchSpec::hidden_neuron_count() const noexcept {
  std::size_t n = 0;
  for (auto w : hidden_widths) n += w;
  return n;
}

std::size_t ArchSpec::parameter_count() const noexcept {
  std::size_t count = 0;
  std::size_t fan_in = input_dim;
  for (auto w : hidden_widths) {
    count += w * (fan_in + 1);
    fan_in = w;
  }
  return count + (fan_in + 1);
}

void ArchSpec::validate() const {
  if (input_dim == 0) throw InputError("input_dim must be positive");
  if (hidden_widths.empty()) throw InputError("at least one hidden layer is required");
  for (std::size_t l = 0; l < hidden_widths.size(); ++l) {
    if (hidden_widths[l] == 0) {
      throw InputError("hidden layer " + std::to_string(l + 1) + " has zero width");
    }
  }
}

std::string ArchSpec::to_string() const {
  std::ostringstream os;
  os << input_dim;
  for (auto w : hidden_widths) os << '-' << w;
  os << "-1";
  return os.str();
}

}  // namespace relucirc
