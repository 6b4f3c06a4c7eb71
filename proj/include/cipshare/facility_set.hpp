#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace cipshare {

// A subset of facility indices stored as a dynamic bitset. Up to 64
// facilities this is a single machine word; trailing zero words are trimmed
// so that equal sets always compare and hash equal regardless of how they
// were built.
class FacilitySet {
 public:
  FacilitySet() = default;
  FacilitySet(std::initializer_list<std::size_t> indices) {
    for (std::size_t i : indices) insert(i);
  }

  static FacilitySet from_indices(const std::vector<std::size_t>& indices) {
    FacilitySet s;
    for (std::size_t i : indices) s.insert(i);
    return s;
  }

  // Bits of `mask` name facilities 0..63.
  static FacilitySet from_mask(std::uint64_t mask) {
    FacilitySet s;
    if (mask != 0) s.words_.push_back(mask);
    return s;
  }

  void insert(std::size_t i) {
    const std::size_t w = i / 64;
    if (w >= words_.size()) words_.resize(w + 1, 0);
    words_[w] |= std::uint64_t{1} << (i % 64);
  }

  void erase(std::size_t i) {
    const std::size_t w = i / 64;
    if (w >= words_.size()) return;
    words_[w] &= ~(std::uint64_t{1} << (i % 64));
    trim();
  }

  bool contains(std::size_t i) const {
    const std::size_t w = i / 64;
    return w < words_.size() && ((words_[w] >> (i % 64)) & 1U) != 0;
  }

  bool empty() const { return words_.empty(); }

  std::size_t size() const {
    std::size_t count = 0;
    for (std::uint64_t w : words_) count += static_cast<std::size_t>(std::popcount(w));
    return count;
  }

  // Largest index + 1, or 0 for the empty set.
  std::size_t extent() const {
    if (words_.empty()) return 0;
    return (words_.size() - 1) * 64 + (64 - static_cast<std::size_t>(std::countl_zero(words_.back())));
  }

  bool is_subset_of(const FacilitySet& other) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      const std::uint64_t o = w < other.words_.size() ? other.words_[w] : 0;
      if ((words_[w] & ~o) != 0) return false;
    }
    return true;
  }

  FacilitySet with(std::size_t i) const {
    FacilitySet s = *this;
    s.insert(i);
    return s;
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits != 0) {
        const int b = std::countr_zero(bits);
        out.push_back(w * 64 + static_cast<std::size_t>(b));
        bits &= bits - 1;
      }
    }
    return out;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits != 0) {
        const int b = std::countr_zero(bits);
        fn(w * 64 + static_cast<std::size_t>(b));
        bits &= bits - 1;
      }
    }
  }

  // Only meaningful when extent() <= 64.
  std::uint64_t mask() const { return words_.empty() ? 0 : words_.front(); }

  // "{0,3,7}"
  std::string to_string() const {
    std::string out = "{";
    bool first = true;
    for_each([&](std::size_t i) {
      if (!first) out += ',';
      out += std::to_string(i);
      first = false;
    });
    out += '}';
    return out;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const FacilitySet&, const FacilitySet&) = default;

  // Lexicographic order on the sorted index lists.
  friend std::strong_ordering operator<=>(const FacilitySet& a, const FacilitySet& b) {
    const auto ia = a.indices();
    const auto ib = b.indices();
    return std::lexicographical_compare_three_way(ia.begin(), ia.end(), ib.begin(), ib.end());
  }

 private:
  void trim() {
    while (!words_.empty() && words_.back() == 0) words_.pop_back();
  }

  std::vector<std::uint64_t> words_;
};

struct FacilitySetHash {
  std::size_t operator()(const FacilitySet& s) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (std::uint64_t w : s.words()) {
      h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

}  // namespace cipshare
