#include "relucirc/dataset.hpp"

#include <fstream>
#include <sstream>

#include "relucirc/error.hpp"

namespace relucirc {

void Dataset::validate() const {
  if (static_cast<std::size_t>(points.cols()) != labels.size()) {
    throw InputError("dataset '" + name + "': point and label counts differ");
  }
  if (!digits.empty() && digits.size() != labels.size()) {
    throw InputError("dataset '" + name + "': digit metadata length differs from labels");
  }
  for (auto y : labels) {
    if (y > 1) throw InputError("dataset '" + name + "': labels must be 0 or 1");
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.name = name;
  out.points.resize(points.rows(), static_cast<Eigen::Index>(indices.size()));
  out.labels.reserve(indices.size());
  if (has_digits()) out.digits.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= size()) throw InputError("subset index out of range");
    out.points.col(static_cast<Eigen::Index>(k)) = point(i);
    out.labels.push_back(labels[i]);
    if (has_digits()) out.digits.push_back(digits[i]);
  }
  return out;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  data.validate();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  for (std::size_t j = 0; j < data.dim(); ++j) out << 'x' << j << ',';
  out << "label";
  if (data.has_digits()) out << ",digit";
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
      out << data.points(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) << ',';
    }
    out << int{data.labels[i]};
    if (data.has_digits()) out << ',' << int{data.digits[i]};
    out << '\n';
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::size_t dim = 0;
  while (dim < header.size() && header[dim] == "x" + std::to_string(dim)) ++dim;
  if (dim == 0 || dim >= header.size() || header[dim] != "label") {
    throw FormatError(path.string() + ": header must be x0,...,label[,digit]");
  }
  const bool with_digits = header.size() == dim + 2 && header[dim + 1] == "digit";
  if (header.size() != dim + 1 && !with_digits) throw FormatError(path.string() + ": unexpected columns");

  std::vector<double> coords;
  Dataset data;
  data.name = path.stem().string();
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + " has wrong column count");
    }
    try {
      for (std::size_t j = 0; j < dim; ++j) coords.push_back(std::stod(cells[j]));
      const int label = std::stoi(cells[dim]);
      if (label != 0 && label != 1) throw FormatError("label must be 0 or 1");
      data.labels.push_back(static_cast<std::uint8_t>(label));
      if (with_digits) data.digits.push_back(static_cast<std::int8_t>(std::stoi(cells[dim + 1])));
    } catch (const std::logic_error&) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + " is not numeric");
    }
  }
  data.points = Eigen::Map<Matrix>(coords.data(), static_cast<Eigen::Index>(dim),
                                   static_cast<Eigen::Index>(data.labels.size()));
  return data;
}

double accuracy(const MlpParams& params, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  Evaluator eval(params);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    correct += (eval.evaluate(data.point(i)) >= 0.0) == (data.labels[i] != 0);
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double accuracy(const Model& model, const Dataset& data) {
  if (!model.bottleneck) return accuracy(model.mlp, data);
  if (data.size() == 0) return 0.0;
  Evaluator eval(model.mlp);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector z = model.bottleneck->apply(data.point(i));
    correct += (eval.evaluate(z) >= 0.0) == (data.labels[i] != 0);
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::pair<Vector, Vector> bounding_box(const Dataset& data) {
  if (data.size() == 0) throw InputError("bounding box of an empty dataset");
  return {data.points.rowwise().minCoeff(), data.points.rowwise().maxCoeff()};
}

}  // namespace relucirc
