#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace relucirc {

/// Fixed-length packed bit string with value semantics, ordering and hashing.
/// Bit i lives in word i/64 at position i%64; unused high bits stay zero so
/// that equality and hashing can work on whole words.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size);

  /// Parses a string of '0'/'1' characters. Other characters throw InputError.
  static BitVector from_string(std::string_view bits);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool value) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }

  std::size_t count() const noexcept;

  /// Copies bits [offset, offset+length).
  BitVector slice(std::size_t offset, std::size_t length) const;

  /// Appends `other` after the last bit.
  void append(const BitVector& other);

  std::string to_string() const;

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const BitVector&, const BitVector&) = default;
  friend std::strong_ordering operator<=>(const BitVector& a, const BitVector& b);

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

struct BitVectorHash {
  std::size_t operator()(const BitVector& v) const noexcept;
};

}  // namespace relucirc

template <>
struct std::hash<relucirc::BitVector> : relucirc::BitVectorHash {};
