#include "rmdim/subset.hpp"

#include "rmdim/error.hpp"

namespace rmdim {

void Subset::insert(std::size_t i) {
  if (i >= universe_) throw InputError("subset index " + std::to_string(i) + " out of range");
  words_[i >> 6] |= std::uint64_t{1} << (i & 63);
}

void Subset::erase(std::size_t i) {
  if (i >= universe_) throw InputError("subset index " + std::to_string(i) + " out of range");
  words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
}

bool Subset::is_subset_of(const Subset& other) const noexcept {
  for (std::size_t k = 0; k < words_.size(); ++k) {
    const std::uint64_t o = k < other.words_.size() ? other.words_[k] : 0;
    if (words_[k] & ~o) return false;
  }
  return true;
}

bool Subset::intersects(const Subset& other) const noexcept {
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t k = 0; k < n; ++k)
    if (words_[k] & other.words_[k]) return true;
  return false;
}

Subset& Subset::operator&=(const Subset& o) noexcept {
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= k < o.words_.size() ? o.words_[k] : 0;
  return *this;
}

Subset& Subset::operator|=(const Subset& o) noexcept {
  const std::size_t n = std::min(words_.size(), o.words_.size());
  for (std::size_t k = 0; k < n; ++k) words_[k] |= o.words_[k];
  trim();
  return *this;
}

Subset& Subset::operator-=(const Subset& o) noexcept {
  const std::size_t n = std::min(words_.size(), o.words_.size());
  for (std::size_t k = 0; k < n; ++k) words_[k] &= ~o.words_[k];
  return *this;
}

Subset Subset::complement() const {
  Subset s = *this;
  for (auto& w : s.words_) w = ~w;
  s.trim();
  return s;
}

std::vector<std::size_t> Subset::indices() const {
  std::vector<std::size_t> out;
  out.reserve(count());
  for_each([&](std::size_t i) { out.push_back(i); });
  return out;
}

std::size_t Subset::first() const noexcept {
  for (std::size_t k = 0; k < words_.size(); ++k)
    if (words_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(words_[k]));
  return universe_;
}

std::size_t Subset::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull ^ universe_;
  for (auto w : words_) {
    h ^= w;
    h *= 0x100000001b3ull;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

std::string Subset::to_string() const {
  std::string s = "{";
  bool first_item = true;
  for_each([&](std::size_t i) {
    if (!first_item) s += ',';
    s += std::to_string(i);
    first_item = false;
  });
  return s + "}";
}

}  // namespace rmdim
