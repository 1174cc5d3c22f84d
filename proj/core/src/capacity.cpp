#include "relucirc/capacity.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <numbers>

#include "relucirc/error.hpp"
#include "relucirc/log.hpp"

namespace relucirc {

std::size_t rational_rank(std::span<const BitVector> rows) {
  using Int = boost::multiprecision::cpp_int;
  if (rows.empty()) return 0;
  const std::size_t cols = rows[0].size();
  std::vector<std::vector<Int>> a(rows.size(), std::vector<Int>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw InputError("rank: rows have different lengths");
    for (std::size_t j = 0; j < cols; ++j) a[i][j] = rows[i].get(j) ? 1 : 0;
  }
  // Bareiss: every division below is exact.
  Int prev = 1;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < a.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < a.size() && a[pivot][col] == 0) ++pivot;
    if (pivot == a.size()) continue;
    std::swap(a[pivot], a[rank]);
    for (std::size_t i = rank + 1; i < a.size(); ++i) {
      for (std::size_t j = col + 1; j < cols; ++j) {
        a[i][j] = (a[i][j] * a[rank][col] - a[i][col] * a[rank][j]) / prev;
      }
      a[i][col] = 0;
    }
    prev = a[rank][col];
    ++rank;
  }
  return rank;
}

ReducedDescription minimal_description(std::span<const NetworkState> sigma0, const ArchSpec& arch) {
  arch.validate();
  const std::size_t d = arch.depth();
  ReducedDescription out;
  out.ranks.assign(d + 2, 1);
  out.ranks[0] = arch.input_dim;
  if (sigma0.empty()) {
    log_warning("no boundary states: describing the network as a single linear classifier");
    out.k = arch.input_dim + 1;
    out.s = 1;
    out.degree = 1;
    return out;
  }
  for (std::size_t l = 1; l <= d; ++l) {
    std::vector<BitVector> rows;
    rows.reserve(sigma0.size());
    for (const auto& s : sigma0) {
      if (s.bits.size() != arch.hidden_neuron_count()) throw InputError("state length does not match architecture");
      rows.push_back(s.layer(arch, l));
    }
    out.ranks[l] = std::max<std::size_t>(1, rational_rank(rows));
    if (out.ranks[l] > 1) out.retained_layers.push_back(l);
  }
  std::uint64_t k = 0;
  std::uint64_t fan_in = arch.input_dim;
  for (auto l : out.retained_layers) {
    k += out.ranks[l] * (fan_in + 1);
    fan_in = out.ranks[l];
  }
  k += fan_in + 1;
  out.k = k;
  out.s = static_cast<std::uint64_t>(sigma0.size()) * sigma0.size();
  out.degree = out.retained_layers.size() + 1;
  return out;
}

double jerrum_bound(std::uint64_t k, std::uint64_t s, std::uint64_t degree) {
  if (k == 0 || s == 0) return 0.0;
  if (degree == 0) throw InputError("degree must be at least 1");
  return 2.0 * static_cast<double>(k) *
         std::log2(8.0 * std::numbers::e * static_cast<double>(degree) * static_cast<double>(s));
}

double vc_bool(const ReducedDescription& description) {
  return jerrum_bound(description.k, description.s, description.degree);
}

double vc_bool(std::span<const NetworkState> sigma0, const ArchSpec& arch) {
  return vc_bool(minimal_description(sigma0, arch));
}

double vc_nodata(const ArchSpec& arch) {
  arch.validate();
  return jerrum_bound(arch.parameter_count(), arch.hidden_neuron_count() + 1, arch.depth() + 1);
}

double gamma_bool(double vc, std::size_t m) {
  if (m == 0) throw InputError("gamma_bool needs m >= 1");
  return std::sqrt(vc / static_cast<double>(m));
}

double spectral_norm(const Matrix& m, int iterations, double tolerance) {
  if (m.size() == 0) return 0.0;
  const Eigen::Index n = m.cols();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i) / static_cast<double>(n);
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Vector u = m * v;
    const Vector w = m.transpose() * u;
    const double norm = w.norm();
    const double next = u.norm();
    if (norm == 0.0) return next;
    v = w / norm;
    if (std::abs(next - sigma) <= tolerance * std::max(1.0, next)) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return (m * v).norm();
}

double l12_norm(const Matrix& m) { return m.colwise().norm().sum(); }

NormBounds norm_bounds(std::span<const Matrix> weights, std::size_t m, double gamma) {
  NormBounds out;
  if (!(gamma > 0.0) || m == 0) return out;
  const double scale = 1.0 / (static_cast<double>(m) * gamma * gamma);
  double prod_fro = 1.0;
  double prod_spec = 1.0;
  double sum_l12 = 0.0;
  double sum_fro = 0.0;
  for (const Matrix& w : weights) {
    const double fro2 = w.squaredNorm();
    const double spec = spectral_norm(w);
    const double spec2 = spec * spec;
    prod_fro *= fro2;
    prod_spec *= spec2;
    if (spec2 > 0.0) {
      const double l12 = l12_norm(w);
      sum_l12 += l12 * l12 / spec2;
      sum_fro += static_cast<double>(w.rows()) * fro2 / spec2;
    }
  }
  out.frobenius = scale * prod_fro;
  out.spec_l12 = scale * prod_spec * sum_l12;
  out.spec_fro = scale * prod_spec * sum_fro;
  return out;
}

NormBounds norm_bounds(const MlpParams& params, std::size_t m, double gamma) {
  return norm_bounds(std::span<const Matrix>(params.weights), m, gamma);
}

void write_bounds_csv(const std::vector<BoundRow>& rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "step,train_acc,gamma,vc_bool,gamma_bool,frobenius,spec_l12,spec_fro\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.step << ',' << r.train_accuracy << ',' << r.gamma << ',' << r.vc_bool << ',' << r.gamma_bool << ','
        << r.norms.frobenius << ',' << r.norms.spec_l12 << ',' << r.norms.spec_fro << '\n';
  }
}

std::vector<BoundRow> read_bounds_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "step,train_acc,gamma,vc_bool,gamma_bool,frobenius,spec_l12,spec_fro") {
    throw FormatError(path.string() + ": not a bounds CSV");
  }
  std::vector<BoundRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    try {
      while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    } catch (const std::logic_error&) {
      throw FormatError(path.string() + ": malformed row '" + line + "'");
    }
    if (v.size() != 8 || v[0] < 0) throw FormatError(path.string() + ": malformed row '" + line + "'");
    BoundRow r;
    r.step = static_cast<std::size_t>(v[0]);
    r.train_accuracy = v[1];
    r.gamma = v[2];
    r.vc_bool = v[3];
    r.gamma_bool = v[4];
    r.norms = {v[5], v[6], v[7]};
    rows.push_back(r);
  }
  return rows;
}

}  // namespace relucirc
