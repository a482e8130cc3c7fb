#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace sigbench {

// Seeded generator with a fixed, implementation-independent output stream.
//
// The engine is std::mt19937_64, whose output sequence is pinned by the C++
// standard. Bounded draws use rejection sampling on raw engine output rather
// than std::uniform_int_distribution (whose algorithm varies between standard
// libraries), so a seed yields the same dataset on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  // Fisher-Yates, walking from the back.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Draws k distinct elements of a pool by partial Fisher-Yates over a
// persistent permutation. Each draw is a uniform k-subset whatever state the
// permutation was left in by earlier draws.
class PoolSampler {
 public:
  explicit PoolSampler(std::size_t pool_size);

  std::size_t pool_size() const noexcept { return perm_.size(); }

  // Returns positions into the pool, in draw order. k <= pool_size().
  std::span<const std::uint32_t> draw(std::size_t k, Rng& rng);

 private:
  std::vector<std::uint32_t> perm_;
};

}  // namespace sigbench
