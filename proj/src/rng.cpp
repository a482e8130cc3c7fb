#include "sigbench/rng.hpp"

#include <limits>
#include <numeric>

#include "sigbench/error.hpp"

namespace sigbench {

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidParameter("Rng::below requires a positive bound");
  // Reject the low (2^64 mod bound) values so the modulo is unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % bound;
  }
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw InvalidParameter("Rng::between requires lo <= hi");
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) {
    return static_cast<std::int64_t>(engine_());
  }
  return lo + static_cast<std::int64_t>(below(span + 1));
}

PoolSampler::PoolSampler(std::size_t pool_size) : perm_(pool_size) {
  std::iota(perm_.begin(), perm_.end(), std::uint32_t{0});
}

std::span<const std::uint32_t> PoolSampler::draw(std::size_t k, Rng& rng) {
  if (k > perm_.size()) {
    throw InvalidParameter("cannot draw " + std::to_string(k) + " distinct items from a pool of " +
                           std::to_string(perm_.size()));
  }
  const std::size_t n = perm_.size();
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(perm_[i], perm_[j]);
  }
  return std::span<const std::uint32_t>(perm_.data(), k);
}

}  // namespace sigbench
