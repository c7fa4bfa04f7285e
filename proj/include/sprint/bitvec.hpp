#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sprint {

// Word-packed bit vector used for pruning vectors and the SLD boolean algebra.
// Bit semantics are defined by the caller (for PruneVector: 1 = pruned).
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t n, bool fill = false)
      : size_(n), words_((n + 63) / 64, fill ? ~0ull : 0ull) {
    trim();
  }

  std::size_t size() const { return size_; }

  bool test(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1ull;
  }

  void set(std::size_t i, bool v = true) {
    if (v)
      words_[i >> 6] |= 1ull << (i & 63);
    else
      words_[i >> 6] &= ~(1ull << (i & 63));
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  bool none() const {
    for (uint64_t w : words_)
      if (w) return false;
    return true;
  }

  bool all() const { return count() == size_; }

  BitVec operator&(const BitVec& o) const {
    check(o);
    BitVec r(size_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = words_[i] & o.words_[i];
    return r;
  }

  BitVec operator|(const BitVec& o) const {
    check(o);
    BitVec r(size_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = words_[i] | o.words_[i];
    return r;
  }

  BitVec operator~() const {
    BitVec r(size_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = ~words_[i];
    r.trim();
    return r;
  }

  // this AND NOT other
  BitVec and_not(const BitVec& o) const {
    check(o);
    BitVec r(size_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = words_[i] & ~o.words_[i];
    return r;
  }

  bool operator==(const BitVec& o) const {
    return size_ == o.size_ && words_ == o.words_;
  }
  bool operator!=(const BitVec& o) const { return !(*this == o); }

  template <typename F>
  void for_each_set(F&& f) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      uint64_t w = words_[wi];
      while (w) {
        unsigned b = std::countr_zero(w);
        f(static_cast<std::size_t>(wi * 64 + b));
        w &= w - 1;
      }
    }
  }

  std::vector<uint32_t> set_bits() const {
    std::vector<uint32_t> out;
    out.reserve(count());
    for_each_set([&](std::size_t i) { out.push_back(static_cast<uint32_t>(i)); });
    return out;
  }

 private:
  void check(const BitVec& o) const {
    if (size_ != o.size_) throw std::invalid_argument("BitVec length mismatch");
  }
  void trim() {
    if (size_ & 63) words_.back() &= (1ull << (size_ & 63)) - 1;
  }

  std::size_t size_ = 0;
  std::vector<uint64_t> words_;
};

// 1 = pruned, 0 = unpruned.
using PruneVector = BitVec;

}  // namespace sprint
