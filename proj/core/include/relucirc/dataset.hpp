#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "relucirc/mlp.hpp"

namespace relucirc {

/// Labelled binary classification data. Samples are stored column-wise so a
/// whole batch can be pushed through a layer with one matrix product.
struct Dataset {
  std::string name;
  Matrix points;                 // dim x m
  std::vector<std::uint8_t> labels;  // 0 or 1
  std::vector<std::int8_t> digits;   // optional per-sample source digit, empty if absent

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(points.rows()); }
  bool has_digits() const noexcept { return !digits.empty(); }
  auto point(std::size_t i) const { return points.col(static_cast<Eigen::Index>(i)); }

  /// Throws InputError when lengths disagree or a label is not 0/1.
  void validate() const;

  /// Rows with the given indices, in order.
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

/// CSV with header `x0,x1,...,label[,digit]`.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Fraction of samples where [N(x) >= 0] equals the label.
double accuracy(const MlpParams& params, const Dataset& data);
double accuracy(const Model& model, const Dataset& data);

/// Coordinate-wise min/max over all samples.
std::pair<Vector, Vector> bounding_box(const Dataset& data);

}  // namespace relucirc
