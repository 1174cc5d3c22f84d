#include "relucirc/mnist.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "relucirc/error.hpp"

namespace relucirc {

namespace {

class GzReader {
 public:
  explicit GzReader(const std::filesystem::path& path) : path_(path.string()) {
    if (!std::filesystem::exists(path)) throw InputError("no such file: " + path_);
    file_ = gzopen(path_.c_str(), "rb");
    if (file_ == nullptr) throw InputError("cannot open " + path_);
  }
  ~GzReader() { gzclose(file_); }
  GzReader(const GzReader&) = delete;
  GzReader& operator=(const GzReader&) = delete;

  void read(void* dst, std::size_t n) {
    auto* out = static_cast<unsigned char*>(dst);
    while (n > 0) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
      const int got = gzread(file_, out, chunk);
      if (got <= 0) throw FormatError(path_ + ": truncated IDX payload");
      out += got;
      n -= static_cast<std::size_t>(got);
    }
  }

  std::uint32_t read_u32() {
    unsigned char b[4];
    read(b, 4);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  gzFile file_ = nullptr;
};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

void write_bytes(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const bool gz = path.extension() == ".gz";
  gzFile f = gzopen(path.string().c_str(), gz ? "wb9" : "wbT");
  if (f == nullptr) throw InputError("cannot write " + path.string());
  const int wrote = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
  gzclose(f);
  if (wrote != static_cast<int>(bytes.size())) throw InputError("short write to " + path.string());
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
  GzReader in(path);
  if (in.read_u32() != 0x00000803u) throw FormatError(in.path() + ": bad IDX image magic");
  IdxImages img;
  img.count = in.read_u32();
  img.rows = in.read_u32();
  img.cols = in.read_u32();
  if (img.rows == 0 || img.cols == 0) throw FormatError(in.path() + ": empty image shape");
  img.pixels.resize(img.count * img.rows * img.cols);
  in.read(img.pixels.data(), img.pixels.size());
  return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  GzReader in(path);
  if (in.read_u32() != 0x00000801u) throw FormatError(in.path() + ": bad IDX label magic");
  std::vector<std::uint8_t> labels(in.read_u32());
  in.read(labels.data(), labels.size());
  return labels;
}

void write_idx_images(const IdxImages& images, const std::filesystem::path& path) {
  if (images.pixels.size() != images.count * images.rows * images.cols) {
    throw InputError("IDX image buffer does not match its shape");
  }
  std::vector<unsigned char> bytes;
  bytes.reserve(16 + images.pixels.size());
  put_u32(bytes, 0x00000803u);
  put_u32(bytes, static_cast<std::uint32_t>(images.count));
  put_u32(bytes, static_cast<std::uint32_t>(images.rows));
  put_u32(bytes, static_cast<std::uint32_t>(images.cols));
  bytes.insert(bytes.end(), images.pixels.begin(), images.pixels.end());
  write_bytes(bytes, path);
}

void write_idx_labels(const std::vector<std::uint8_t>& labels, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes;
  put_u32(bytes, 0x00000801u);
  put_u32(bytes, static_cast<std::uint32_t>(labels.size()));
  bytes.insert(bytes.end(), labels.begin(), labels.end());
  write_bytes(bytes, path);
}

Dataset load_mnist_binary(const std::filesystem::path& images, const std::filesystem::path& labels,
                          std::size_t m, std::uint64_t seed) {
  const IdxImages img = read_idx_images(images);
  const std::vector<std::uint8_t> digits = read_idx_labels(labels);
  if (digits.size() != img.count) throw FormatError("IDX image and label counts differ");
  if (m > img.count) {
    throw InputError("requested " + std::to_string(m) + " samples but file has " + std::to_string(img.count));
  }
  std::vector<std::size_t> order(img.count);
  std::iota(order.begin(), order.end(), 0);
  if (m != 0) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(m);
  }

  const std::size_t dim = img.rows * img.cols;
  Dataset data;
  data.name = "mnist";
  data.points.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(order.size()));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::uint8_t* px = img.pixels.data() + order[k] * dim;
    for (std::size_t j = 0; j < dim; ++j) {
      data.points(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = px[j] / 255.0;
    }
    const std::uint8_t digit = digits[order[k]];
    if (digit > 9) throw FormatError("IDX label out of range 0-9");
    data.labels.push_back(digit >= 5 ? 1 : 0);
    data.digits.push_back(static_cast<std::int8_t>(digit));
  }
  return data;
}

Dataset subsample_prosthetic(const Dataset& data, std::uint64_t seed, double true_fraction) {
  if (!data.has_digits()) throw InputError("prosthetic subsampling needs digit metadata");
  if (!(true_fraction > 0.0 && true_fraction <= 1.0)) throw InputError("true_fraction must lie in (0,1]");
  std::vector<std::size_t> fours;
  std::vector<std::size_t> highs;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.digits[i] == 4) fours.push_back(i);
    if (data.digits[i] >= 5) highs.push_back(i);
  }
  if (fours.empty()) throw InputError("no digit-4 samples to build a prosthetic set from");

  std::mt19937_64 rng(seed);
  std::shuffle(highs.begin(), highs.end(), rng);
  highs.resize(static_cast<std::size_t>(std::llround(true_fraction * static_cast<double>(highs.size()))));

  std::vector<std::size_t> keep = fours;
  keep.insert(keep.end(), highs.begin(), highs.end());
  std::sort(keep.begin(), keep.end());
  Dataset out = data.subset(keep);
  out.name = data.name + "-prosthetic";
  for (std::size_t k = 0; k < out.size(); ++k) out.labels[k] = out.digits[k] >= 5 ? 1 : 0;
  return out;
}

std::filesystem::path find_idx_file(const std::filesystem::path& dir, const std::vector<std::string>& names) {
  for (const auto& name : names) {
    for (const char* ext : {"", ".gz"}) {
      const auto p = dir / (name + ext);
      if (std::filesystem::exists(p)) return p;
    }
  }
  throw InputError("no " + (names.empty() ? std::string("IDX") : names.front()) + " file in " + dir.string());
}

MnistSplits load_mnist_splits(const std::filesystem::path& dir, std::size_t train, std::size_t validation,
                              std::size_t test, std::uint64_t seed) {
  if (train == 0) throw InputError("the training split must not be empty");
  const Dataset pool = load_mnist_binary(find_idx_file(dir, {"train-images-idx3-ubyte"}),
                                         find_idx_file(dir, {"train-labels-idx1-ubyte"}), 0, 0);
  if (train + validation > pool.size()) {
    throw InputError("training file has " + std::to_string(pool.size()) + " samples, " +
                     std::to_string(train + validation) + " requested");
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  MnistSplits s;
  s.train = pool.subset({order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train)});
  s.validation = pool.subset({order.begin() + static_cast<std::ptrdiff_t>(train),
                              order.begin() + static_cast<std::ptrdiff_t>(train + validation)});
  s.test = load_mnist_binary(find_idx_file(dir, {"t10k-images-idx3-ubyte", "test-images-idx3-ubyte"}),
                             find_idx_file(dir, {"t10k-labels-idx1-ubyte", "test-labels-idx1-ubyte"}), test, seed);
  s.train.name = "mnist-train";
  s.validation.name = "mnist-validation";
  s.test.name = "mnist-test";
  return s;
}

}  // namespace relucirc
