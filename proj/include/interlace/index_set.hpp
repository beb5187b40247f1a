#ifndef INTERLACE_INDEX_SET_HPP_
#define INTERLACE_INDEX_SET_HPP_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace interlace {

/// Subset of {0, .., n-1} stored as a bitmask.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(std::size_t n, bool full = false)
      : n_(n), words_((n + 63) / 64, full ? ~std::uint64_t{0} : 0) {
    if (full && n % 64 != 0) words_.back() = (std::uint64_t{1} << (n % 64)) - 1;
  }

  std::size_t universe() const { return n_; }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool empty() const {
    for (auto w : words_)
      if (w) return false;
    return true;
  }

  template <class F>
  void for_each(F &&f) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      std::uint64_t w = words_[k];
      while (w) {
        f(k * 64 + static_cast<std::size_t>(std::countr_zero(w)));
        w &= w - 1;
      }
    }
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for_each([&](std::size_t i) { out.push_back(i); });
    return out;
  }

  /// The set as an integer code; only for universes of at most 64 points.
  std::uint64_t code() const {
    if (n_ > 64) throw std::logic_error("IndexSet::code needs universe <= 64");
    return words_.empty() ? 0 : words_[0];
  }

  bool is_subset_of(const IndexSet &o) const {
    for (std::size_t k = 0; k < words_.size(); ++k)
      if (words_[k] & ~o.words_[k]) return false;
    return true;
  }

  IndexSet &operator|=(const IndexSet &o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= o.words_[k];
    return *this;
  }
  IndexSet &operator&=(const IndexSet &o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= o.words_[k];
    return *this;
  }
  bool operator==(const IndexSet &o) const {
    return n_ == o.n_ && words_ == o.words_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace interlace

#endif  // INTERLACE_INDEX_SET_HPP_
