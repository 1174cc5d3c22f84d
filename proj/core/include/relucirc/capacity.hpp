#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "relucirc/mlp.hpp"

namespace relucirc {

/// Reduced architecture that still realizes the boundary-state formula.
///
/// ranks[l] for l = 0..d+1: ranks[0] is the input dimension, ranks[1..d] the
/// rational rank of the boundary states restricted to hidden layer l (at
/// least 1), and ranks[d+1] = 1 for the readout. Layers with rank 1 are
/// dropped and their neighbours compose directly.
struct ReducedDescription {
  std::vector<std::size_t> ranks;
  std::vector<std::size_t> retained_layers;
  std::uint64_t k = 0;
  std::uint64_t s = 0;
  std::uint64_t degree = 1;
};

/// Rank over the rationals of a 0/1 matrix given as rows of bit vectors
/// (fraction-free elimination on arbitrary-precision integers).
std::size_t rational_rank(std::span<const BitVector> rows);

ReducedDescription minimal_description(std::span<const NetworkState> sigma0, const ArchSpec& arch);

/// 2 k log2(8 e degree s); 0 when k or s is 0.
double jerrum_bound(std::uint64_t k, std::uint64_t s, std::uint64_t degree);

double vc_bool(std::span<const NetworkState> sigma0, const ArchSpec& arch);
double vc_bool(const ReducedDescription& description);

/// Data-independent bound: all parameters, every neuron (hidden and output)
/// as a predicate, degree d+1.
double vc_nodata(const ArchSpec& arch);

/// sqrt(vc / m).
double gamma_bool(double vc, std::size_t m);

/// Largest singular value by power iteration on M^T M from a fixed start.
double spectral_norm(const Matrix& m, int iterations = 100, double tolerance = 1e-10);
/// Sum of the Euclidean norms of the columns.
double l12_norm(const Matrix& m);

struct NormBounds {
  double frobenius = std::numeric_limits<double>::infinity();
  double spec_l12 = std::numeric_limits<double>::infinity();
  double spec_fro = std::numeric_limits<double>::infinity();
};

/// With P = prod ||W||_2^2 over all given matrices:
///   frobenius = prod ||W||_F^2 / (m gamma^2)
///   spec_l12  = P * sum ||W||_{1,2}^2 / ||W||_2^2 / (m gamma^2)
///   spec_fro  = P * sum h_l ||W||_F^2 / ||W||_2^2 / (m gamma^2)
/// where h_l is the number of rows (output width) of W^l. All three are
/// +infinity when gamma <= 0.
NormBounds norm_bounds(std::span<const Matrix> weights, std::size_t m, double gamma);
NormBounds norm_bounds(const MlpParams& params, std::size_t m, double gamma);

/// One row of a bound-vs-training-step series.
struct BoundRow {
  std::size_t step = 0;
  double train_accuracy = 0.0;
  double gamma = 0.0;
  double vc_bool = 0.0;
  double gamma_bool = 0.0;
  NormBounds norms;
  std::size_t boundary_states = 0;
  std::size_t states = 0;
};

/// CSV `step,train_acc,gamma,vc_bool,gamma_bool,frobenius,spec_l12,spec_fro`.
void write_bounds_csv(const std::vector<BoundRow>& rows, const std::filesystem::path& path);
/// Inverse of write_bounds_csv (state counts are not stored and read back as 0).
std::vector<BoundRow> read_bounds_csv(const std::filesystem::path& path);

}  // namespace relucirc
