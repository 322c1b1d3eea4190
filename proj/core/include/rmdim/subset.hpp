#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace rmdim {

/// Fixed-universe bitset over carrier indices [0, universe).
class Subset {
 public:
  Subset() = default;
  explicit Subset(std::size_t universe) : universe_(universe), words_((universe + 63) / 64, 0) {}
  Subset(std::size_t universe, std::initializer_list<std::size_t> members) : Subset(universe) {
    for (auto m : members) insert(m);
  }

  static Subset full(std::size_t universe) {
    Subset s(universe);
    for (auto& w : s.words_) w = ~std::uint64_t{0};
    s.trim();
    return s;
  }
  static Subset from_indices(std::size_t universe, const std::vector<std::size_t>& idx) {
    Subset s(universe);
    for (auto i : idx) s.insert(i);
    return s;
  }

  std::size_t universe() const noexcept { return universe_; }

  bool contains(std::size_t i) const noexcept {
    return i < universe_ && ((words_[i >> 6] >> (i & 63)) & 1u);
  }
  void insert(std::size_t i);
  void erase(std::size_t i);

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool empty() const noexcept {
    for (auto w : words_)
      if (w) return false;
    return true;
  }

  bool is_subset_of(const Subset& other) const noexcept;
  bool intersects(const Subset& other) const noexcept;

  Subset& operator&=(const Subset& o) noexcept;
  Subset& operator|=(const Subset& o) noexcept;
  /// Set difference.
  Subset& operator-=(const Subset& o) noexcept;
  Subset complement() const;

  friend Subset operator&(Subset a, const Subset& b) noexcept { return a &= b; }
  friend Subset operator|(Subset a, const Subset& b) noexcept { return a |= b; }
  friend Subset operator-(Subset a, const Subset& b) noexcept { return a -= b; }
  friend bool operator==(const Subset&, const Subset&) = default;
  friend auto operator<=>(const Subset& a, const Subset& b) {
    if (a.universe_ != b.universe_) return a.universe_ <=> b.universe_;
    for (std::size_t k = a.words_.size(); k-- > 0;)
      if (a.words_[k] != b.words_[k]) return a.words_[k] <=> b.words_[k];
    return std::strong_ordering::equal;
  }

  /// Ascending member indices.
  std::vector<std::size_t> indices() const;

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      std::uint64_t w = words_[k];
      while (w) {
        const int b = std::countr_zero(w);
        f(k * 64 + static_cast<std::size_t>(b));
        w &= w - 1;
      }
    }
  }

  /// Lowest member, or universe() when empty.
  std::size_t first() const noexcept;

  /// Low 64 bits; meaningful when universe() <= 64.
  std::uint64_t mask64() const noexcept { return words_.empty() ? 0 : words_[0]; }

  std::size_t hash() const noexcept;
  std::string to_string() const;

 private:
  void trim() noexcept {
    if (universe_ % 64 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (universe_ % 64)) - 1;
  }

  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

struct SubsetHash {
  std::size_t operator()(const Subset& s) const noexcept { return s.hash(); }
};

}  // namespace rmdim
