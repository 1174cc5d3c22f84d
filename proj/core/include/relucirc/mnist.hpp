#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "relucirc/dataset.hpp"

namespace relucirc {

/// Raw IDX image file (magic 0x00000803): `count` images of rows x cols bytes.
struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major per image
};

/// Both readers accept plain or gzip-compressed files. Bad magic or a
/// truncated payload throws FormatError; a missing file throws InputError.
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

void write_idx_images(const IdxImages& images, const std::filesystem::path& path);
void write_idx_labels(const std::vector<std::uint8_t>& labels, const std::filesystem::path& path);

/// Digits 0-4 vs 5-9. Pixels are scaled to [0,1] and flattened; label is 1
/// iff digit >= 5; the digit itself is kept in Dataset::digits. `m` samples
/// are drawn without replacement using `seed` (m == 0 keeps every sample in
/// file order).
Dataset load_mnist_binary(const std::filesystem::path& images, const std::filesystem::path& labels,
                          std::size_t m, std::uint64_t seed);

struct MnistSplits {
  Dataset train;
  Dataset validation;  // drawn from the training file, disjoint from train
  Dataset test;
};

/// First of `names` present in `dir`, plain or with .gz.
std::filesystem::path find_idx_file(const std::filesystem::path& dir, const std::vector<std::string>& names);

/// train and validation come from one seeded shuffle of the training file,
/// test is a seeded draw of `test` samples from the test file (t10k-* or test-*).
MnistSplits load_mnist_splits(const std::filesystem::path& dir, std::size_t train, std::size_t validation,
                              std::size_t test, std::uint64_t seed);

/// Keeps fours (relabelled 0) and a `true_fraction` share of the 5-9 samples
/// (relabelled 1), chosen with `seed`; every other digit is dropped.
Dataset subsample_prosthetic(const Dataset& data, std::uint64_t seed, double true_fraction = 0.3);

}  // namespace relucirc
