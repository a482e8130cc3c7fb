#pragma once

#include <cstdint>
#include <span>

#include "sigbench/event_model.hpp"

namespace sigbench {

struct MetricOptions {
  // true: every kNoiseLabel item belongs to one shared group (in both
  // partitions). false: each noise item is its own singleton group.
  bool noise_as_cluster = true;
};

// Pair classification of two partitions of the same n items; the four
// counts sum to n(n-1)/2.
struct PairCounts {
  std::uint64_t tp = 0;  // together in both
  std::uint64_t tn = 0;  // apart in both
  std::uint64_t fp = 0;  // together in the prediction only
  std::uint64_t fn = 0;  // together in the truth only

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }

  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

// Throws InvalidInput on length mismatch.
PairCounts pair_counts(std::span<const Label> truth, std::span<const Label> pred,
                       const MetricOptions& options = {});

// (tp + tn) / total. Throws UndefinedMetric when total == 0.
double rand_index(const PairCounts& counts);

// Hubert-Arabie adjusted Rand index from the contingency table, in exact
// integer arithmetic. When the maximum index equals the expected index the
// result is 1.0 for identical partitions and 0.0 otherwise.
// Throws InvalidInput on length mismatch, UndefinedMetric when n < 2.
double adjusted_rand_index(std::span<const Label> truth, std::span<const Label> pred,
                           const MetricOptions& options = {});

// Same quantity expressed through pair counts.
double adjusted_rand_index(const PairCounts& counts);

}  // namespace sigbench
