#include "relucirc/grid.hpp"

#include <limits>

#include "relucirc/error.hpp"

namespace relucirc {

std::uint64_t GridSpec::total_points() const noexcept {
  if (resolution.empty()) return 0;
  std::uint64_t n = 1;
  for (auto r : resolution) {
    if (r != 0 && n > std::numeric_limits<std::uint64_t>::max() / r) return std::numeric_limits<std::uint64_t>::max();
    n *= r;
  }
  return n;
}

double GridSpec::cell_size(std::size_t axis) const {
  const auto a = static_cast<Eigen::Index>(axis);
  return (upper[a] - lower[a]) / static_cast<double>(resolution[axis] - 1);
}

double GridSpec::min_cell_size() const {
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < dim(); ++a) h = std::min(h, cell_size(a));
  return h;
}

void GridSpec::validate() const {
  if (resolution.empty()) throw InputError("grid has no axes");
  if (static_cast<std::size_t>(lower.size()) != dim() || static_cast<std::size_t>(upper.size()) != dim()) {
    throw InputError("grid corners do not match the number of axes");
  }
  for (std::size_t a = 0; a < dim(); ++a) {
    const auto i = static_cast<Eigen::Index>(a);
    if (!(lower[i] < upper[i])) throw InputError("grid lower corner must be below upper corner");
    if (resolution[a] < 2) throw InputError("grid resolution must be at least 2 per axis");
  }
}

void GridSpec::point(std::uint64_t index, Vector& out) const {
  out.resize(static_cast<Eigen::Index>(dim()));
  for (std::size_t a = 0; a < dim(); ++a) {
    const std::uint64_t r = resolution[a];
    const std::uint64_t k = index % r;
    index /= r;
    const auto i = static_cast<Eigen::Index>(a);
    // Hit the upper corner exactly on the last lattice line.
    out[i] = k + 1 == r ? upper[i] : lower[i] + static_cast<double>(k) * cell_size(a);
  }
}

Vector GridSpec::point(std::uint64_t index) const {
  Vector v;
  point(index, v);
  return v;
}

std::vector<std::size_t> GridSpec::coords(std::uint64_t index) const {
  std::vector<std::size_t> c(dim());
  for (std::size_t a = 0; a < dim(); ++a) {
    c[a] = static_cast<std::size_t>(index % resolution[a]);
    index /= resolution[a];
  }
  return c;
}

GridSpec GridSpec::refined(std::size_t factor) const {
  if (factor == 0) throw InputError("refinement factor must be positive");
  GridSpec g = *this;
  for (auto& r : g.resolution) r = (r - 1) * factor + 1;
  return g;
}

GridSpec GridSpec::uniform(const Vector& lower, const Vector& upper, std::size_t resolution) {
  GridSpec g{lower, upper, std::vector<std::size_t>(static_cast<std::size_t>(lower.size()), resolution)};
  g.validate();
  return g;
}

GridSpec grid_around(const Matrix& points, std::size_t resolution, double expand) {
  if (points.cols() == 0) throw InputError("cannot size a grid around zero points");
  Vector lo = points.rowwise().minCoeff();
  Vector hi = points.rowwise().maxCoeff();
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    double extent = hi[i] - lo[i];
    if (extent <= 0.0) extent = 1.0;
    lo[i] -= expand * extent;
    hi[i] += expand * extent;
  }
  return GridSpec::uniform(lo, hi, resolution);
}

GridSpec grid_around(const Dataset& data, std::size_t resolution, double expand) {
  return grid_around(data.points, resolution, expand);
}

}  // namespace relucirc
