#include "relucirc/bitvector.hpp"

#include <bit>

#include "relucirc/error.hpp"

namespace relucirc {

BitVector::BitVector(std::size_t size) : words_((size + 63) / 64, 0), size_(size) {}

BitVector BitVector::from_string(std::string_view bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      v.set(i, true);
    } else if (bits[i] != '0') {
      throw InputError("bit string contains '" + std::string(1, bits[i]) + "'");
    }
  }
  return v;
}

std::size_t BitVector::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

BitVector BitVector::slice(std::size_t offset, std::size_t length) const {
  if (offset + length > size_) throw InputError("BitVector::slice out of range");
  BitVector out(length);
  for (std::size_t i = 0; i < length; ++i) out.set(i, get(offset + i));
  return out;
}

void BitVector::append(const BitVector& other) {
  const std::size_t old = size_;
  size_ += other.size_;
  words_.resize((size_ + 63) / 64, 0);
  for (std::size_t i = 0; i < other.size_; ++i) set(old + i, other.get(i));
}

std::string BitVector::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

std::strong_ordering operator<=>(const BitVector& a, const BitVector& b) {
  if (auto c = a.size_ <=> b.size_; c != 0) return c;
  // Lexicographic on bit positions: compare the first differing bit.
  for (std::size_t w = 0; w < a.words_.size(); ++w) {
    const std::uint64_t diff = a.words_[w] ^ b.words_[w];
    if (diff != 0) {
      const int bit = std::countr_zero(diff);
      const bool abit = (a.words_[w] >> bit) & 1u;
      return abit ? std::strong_ordering::greater : std::strong_ordering::less;
    }
  }
  return std::strong_ordering::equal;
}

std::size_t BitVectorHash::operator()(const BitVector& v) const noexcept {
  // splitmix64 over the words, seeded by the length.
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ v.size();
  for (auto w : v.words()) {
    std::uint64_t z = w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    h ^= z ^ (z >> 31);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace relucirc
