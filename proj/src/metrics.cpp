#include "sigbench/metrics.hpp"

#include <unordered_map>
#include <vector>

#include "sigbench/error.hpp"

namespace sigbench {

namespace {

__extension__ using Wide = __int128;

std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

// Maps labels to dense group ids; noise becomes one group or fresh singletons.
std::vector<std::uint32_t> dense_groups(std::span<const Label> labels, const MetricOptions& options,
                                        std::uint32_t& group_count) {
  std::unordered_map<Label, std::uint32_t> ids;
  std::vector<std::uint32_t> out(labels.size());
  group_count = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kNoiseLabel && !options.noise_as_cluster) {
      out[i] = group_count++;
      continue;
    }
    auto [it, inserted] = ids.try_emplace(labels[i], group_count);
    if (inserted) ++group_count;
    out[i] = it->second;
  }
  return out;
}

struct Contingency {
  std::uint64_t n = 0;
  std::uint64_t sum_cells = 0;  // Σ C(n_ij, 2)
  std::uint64_t sum_truth = 0;  // Σ C(a_i, 2)
  std::uint64_t sum_pred = 0;   // Σ C(b_j, 2)
};

Contingency contingency(std::span<const Label> truth, std::span<const Label> pred,
                        const MetricOptions& options) {
  if (truth.size() != pred.size()) {
    throw InvalidInput("label sequences differ in length (" + std::to_string(truth.size()) + " vs " +
                       std::to_string(pred.size()) + ")");
  }
  std::uint32_t truth_groups = 0;
  std::uint32_t pred_groups = 0;
  const auto t = dense_groups(truth, options, truth_groups);
  const auto p = dense_groups(pred, options, pred_groups);

  std::vector<std::uint64_t> row(truth_groups, 0);
  std::vector<std::uint64_t> col(pred_groups, 0);
  std::unordered_map<std::uint64_t, std::uint64_t> cells;
  cells.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    ++row[t[i]];
    ++col[p[i]];
    ++cells[(static_cast<std::uint64_t>(t[i]) << 32) | p[i]];
  }
  Contingency c;
  c.n = t.size();
  for (auto v : row) c.sum_truth += choose2(v);
  for (auto v : col) c.sum_pred += choose2(v);
  for (const auto& [key, v] : cells) c.sum_cells += choose2(v);
  return c;
}

double ari_from_sums(std::uint64_t total, std::uint64_t index, std::uint64_t sum_truth,
                     std::uint64_t sum_pred) {
  // ARI = (index - a*b/T) / ((a+b)/2 - a*b/T), scaled by 2T to stay integral.
  const Wide t = total;
  const Wide a = sum_truth;
  const Wide b = sum_pred;
  const Wide numerator = 2 * (t * static_cast<Wide>(index) - a * b);
  const Wide denominator = t * (a + b) - 2 * a * b;
  if (denominator == 0) {
    const bool identical = index == sum_truth && index == sum_pred;
    return identical ? 1.0 : 0.0;
  }
  return static_cast<double>(static_cast<long double>(numerator) /
                             static_cast<long double>(denominator));
}

}  // namespace

PairCounts pair_counts(std::span<const Label> truth, std::span<const Label> pred,
                       const MetricOptions& options) {
  const Contingency c = contingency(truth, pred, options);
  PairCounts out;
  out.tp = c.sum_cells;
  out.fn = c.sum_truth - c.sum_cells;
  out.fp = c.sum_pred - c.sum_cells;
  out.tn = choose2(c.n) - out.tp - out.fn - out.fp;
  return out;
}

double rand_index(const PairCounts& counts) {
  const std::uint64_t total = counts.total();
  if (total == 0) throw UndefinedMetric("Rand index needs at least two items");
  return static_cast<double>(counts.tp + counts.tn) / static_cast<double>(total);
}

double adjusted_rand_index(std::span<const Label> truth, std::span<const Label> pred,
                           const MetricOptions& options) {
  const Contingency c = contingency(truth, pred, options);
  if (c.n < 2) throw UndefinedMetric("adjusted Rand index needs at least two items");
  return ari_from_sums(choose2(c.n), c.sum_cells, c.sum_truth, c.sum_pred);
}

double adjusted_rand_index(const PairCounts& counts) {
  if (counts.total() == 0) throw UndefinedMetric("adjusted Rand index needs at least two items");
  return ari_from_sums(counts.total(), counts.tp, counts.tp + counts.fn, counts.tp + counts.fp);
}

}  // namespace sigbench
