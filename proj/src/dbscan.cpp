#include "sigbench/dbscan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>

#include "sigbench/error.hpp"

namespace sigbench {

namespace {

constexpr Label kUnassigned = -2;

// distance(i, j) <= eps, decided through a per-(size, size) table of the
// minimum shared count. The distance is non-increasing in the shared count
// for fixed set sizes, so the table reproduces the direct comparison exactly.
class EpsPredicate {
 public:
  static constexpr std::size_t kMaxTabulatedSize = 128;

  EpsPredicate(const EncodedDataset& data, double eps) : data_(data), eps_(eps) {
    if (data.max_row_size() <= kMaxTabulatedSize) {
      stride_ = data.max_row_size() + 1;
      min_shared_.assign(stride_ * stride_, 0);
      for (std::size_t a = 0; a < stride_; ++a) {
        for (std::size_t b = 0; b < stride_; ++b) {
          std::size_t s = 0;
          const std::size_t cap = std::min(a, b);
          while (s <= cap && jaccard_distance_from_counts(s, a + b - s) > eps) ++s;
          min_shared_[a * stride_ + b] = static_cast<std::uint16_t>(s);
        }
      }
    }
  }

  bool tabulated() const noexcept { return stride_ != 0; }

  // Only meaningful when tabulated(). May exceed min(a, b): never within eps.
  std::size_t min_shared(std::size_t a, std::size_t b) const { return min_shared_[a * stride_ + b]; }

  bool operator()(std::size_t i, std::size_t j) const {
    const std::size_t a = data_.row_size(i);
    const std::size_t b = data_.row_size(j);
    const std::size_t shared = data_.shared_count(i, j);
    if (stride_ != 0) return shared >= min_shared_[a * stride_ + b];
    return jaccard_distance_from_counts(shared, a + b - shared) <= eps_;
  }

 private:
  const EncodedDataset& data_;
  double eps_;
  std::size_t stride_ = 0;
  std::vector<std::uint16_t> min_shared_;
};

// Prefix filter: with dimensions ranked rarest first, two rows sharing at
// least t dimensions must share one within their first (size - t + 1)
// ranked dimensions. Each row indexes that prefix, and candidate partners
// are the earlier rows found in its prefix postings.
class PrefixIndex {
 public:
  // Empty optional when some pair could be within eps while sharing nothing.
  static std::optional<PrefixIndex> build(const EncodedDataset& data, const EpsPredicate& within) {
    if (!within.tabulated()) return std::nullopt;
    const std::size_t n = data.size();
    std::vector<bool> size_seen(data.max_row_size() + 1, false);
    for (std::size_t i = 0; i < n; ++i) size_seen[data.row_size(i)] = true;
    std::vector<std::size_t> threshold(size_seen.size(), 0);
    for (std::size_t a = 0; a < size_seen.size(); ++a) {
      if (!size_seen[a]) continue;
      std::size_t t = SIZE_MAX;
      for (std::size_t b = 0; b < size_seen.size(); ++b) {
        if (size_seen[b]) t = std::min(t, within.min_shared(a, b));
      }
      if (t == 0) return std::nullopt;
      threshold[a] = t;
    }

    std::vector<std::uint32_t> frequency(data.dimension_count(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::uint32_t d : data.row(i)) ++frequency[d];
    }
    std::vector<std::uint32_t> by_rank(data.dimension_count());
    for (std::uint32_t d = 0; d < by_rank.size(); ++d) by_rank[d] = d;
    std::stable_sort(by_rank.begin(), by_rank.end(),
                     [&](std::uint32_t x, std::uint32_t y) { return frequency[x] < frequency[y]; });
    std::vector<std::uint32_t> rank(data.dimension_count());
    for (std::uint32_t r = 0; r < by_rank.size(); ++r) rank[by_rank[r]] = r;

    PrefixIndex index;
    index.prefix_offsets_.reserve(n + 1);
    index.prefix_offsets_.push_back(0);
    std::vector<std::uint32_t> ranked;
    std::vector<std::uint32_t> posting_size(data.dimension_count(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ranked.clear();
      for (std::uint32_t d : data.row(i)) ranked.push_back(rank[d]);
      std::sort(ranked.begin(), ranked.end());
      const std::size_t size = ranked.size();
      const std::size_t t = threshold[size];
      const std::size_t keep = t > size ? 0 : size - t + 1;
      for (std::size_t k = 0; k < keep; ++k) {
        index.prefix_.push_back(ranked[k]);
        ++posting_size[ranked[k]];
      }
      index.prefix_offsets_.push_back(index.prefix_.size());
    }
    index.posting_offsets_.assign(data.dimension_count() + 1, 0);
    for (std::size_t r = 0; r < posting_size.size(); ++r) {
      index.posting_offsets_[r + 1] = index.posting_offsets_[r] + posting_size[r];
    }
    index.postings_.resize(index.posting_offsets_.back());
    std::vector<std::size_t> fill(index.posting_offsets_.begin(), index.posting_offsets_.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = index.prefix_offsets_[i]; k < index.prefix_offsets_[i + 1]; ++k) {
        index.postings_[fill[index.prefix_[k]]++] = static_cast<std::uint32_t>(i);
      }
    }
    return index;
  }

  // Calls fn(j) once for every j < i that may be within eps of i.
  template <typename Fn>
  void for_each_candidate(std::size_t i, std::vector<std::uint32_t>& stamp, Fn&& fn) const {
    const auto mark = static_cast<std::uint32_t>(i + 1);
    for (std::size_t k = prefix_offsets_[i]; k < prefix_offsets_[i + 1]; ++k) {
      const std::uint32_t r = prefix_[k];
      for (std::size_t p = posting_offsets_[r]; p < posting_offsets_[r + 1]; ++p) {
        const std::uint32_t j = postings_[p];
        if (j >= i) break;
        if (stamp[j] == mark) continue;
        stamp[j] = mark;
        fn(j);
      }
    }
  }

 private:
  std::vector<std::size_t> prefix_offsets_;
  std::vector<std::uint32_t> prefix_;
  std::vector<std::size_t> posting_offsets_;
  std::vector<std::uint32_t> postings_;  // ascending row ids per ranked dimension
};

struct NeighborPass {
  std::vector<std::uint32_t> degree;  // includes the point itself
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  bool stored = true;
};

NeighborPass scan_pairs(const EncodedDataset& data, const EpsPredicate& within,
                        const DbscanOptions& options) {
  const std::size_t n = data.size();
  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(n)));
  const std::optional<PrefixIndex> prefix = PrefixIndex::build(data, within);
  std::atomic<std::size_t> budget_used{0};
  std::atomic<bool> overflow{false};

  std::vector<NeighborPass> partials(workers);
  auto work = [&](unsigned t) {
    NeighborPass& part = partials[t];
    part.degree.assign(n, 0);
    auto record = [&](std::size_t i, std::size_t j) {
      ++part.degree[i];
      ++part.degree[j];
      if (overflow.load(std::memory_order_relaxed)) return;
      if (budget_used.fetch_add(2, std::memory_order_relaxed) + 2 > options.max_stored_neighbors) {
        overflow.store(true, std::memory_order_relaxed);
      } else {
        part.edges.emplace_back(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i));
      }
    };
    if (prefix) {
      std::vector<std::uint32_t> stamp(n, 0);
      for (std::size_t i = t; i < n; i += workers) {
        prefix->for_each_candidate(i, stamp, [&](std::size_t j) {
          if (within(i, j)) record(i, j);
        });
      }
    } else {
      for (std::size_t i = t; i < n; i += workers) {
        for (std::size_t j = 0; j < i; ++j) {
          if (within(i, j)) record(i, j);
        }
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work, t);
  }

  NeighborPass out = std::move(partials[0]);
  for (unsigned t = 1; t < workers; ++t) {
    for (std::size_t i = 0; i < n; ++i) out.degree[i] += partials[t].degree[i];
    out.edges.insert(out.edges.end(), partials[t].edges.begin(), partials[t].edges.end());
    partials[t] = {};
  }
  for (auto& d : out.degree) ++d;
  out.stored = !overflow.load();
  if (!out.stored) {
    out.edges.clear();
    out.edges.shrink_to_fit();
  }
  return out;
}

}  // namespace

void DbscanConfig::validate() const {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw InvalidParameter("eps must satisfy 0 < eps <= 1 (got " + std::to_string(eps) + ")");
  }
  if (min_samples < 1) throw InvalidParameter("min_samples must be >= 1");
}

std::size_t ClusteringResult::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoiseLabel));
}

ClusteringResult dbscan(const EncodedDataset& data, const DbscanConfig& config,
                        const DbscanOptions& options) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ClusteringResult result;
  const std::size_t n = data.size();
  if (n == 0) return result;

  const EpsPredicate within(data, config.eps);
  NeighborPass pass = scan_pairs(data, within, options);
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = pass.degree[i] >= config.min_samples;

  // Adjacency of core points only; border and noise points never expand.
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> adjacency;
  if (pass.stored) {
    offsets.assign(n + 1, 0);
    for (auto [i, j] : pass.edges) {
      if (core[i]) ++offsets[i + 1];
      if (core[j]) ++offsets[j + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    adjacency.resize(offsets[n]);
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (auto [i, j] : pass.edges) {
      if (core[i]) adjacency[fill[i]++] = j;
      if (core[j]) adjacency[fill[j]++] = i;
    }
    pass.edges.clear();
    pass.edges.shrink_to_fit();
  }

  std::vector<std::uint32_t> on_demand;
  auto neighbors_of = [&](std::size_t p) -> std::span<const std::uint32_t> {
    if (pass.stored) return {adjacency.data() + offsets[p], offsets[p + 1] - offsets[p]};
    on_demand.clear();
    for (std::size_t q = 0; q < n; ++q) {
      if (q != p && within(p, q)) on_demand.push_back(static_cast<std::uint32_t>(q));
    }
    return on_demand;
  };

  result.labels.assign(n, kUnassigned);
  Label cluster = 0;
  std::vector<std::uint32_t> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    if (result.labels[i] != kUnassigned || !core[i]) continue;
    result.labels[i] = cluster;
    frontier.assign(1, static_cast<std::uint32_t>(i));
    while (!frontier.empty()) {
      const std::uint32_t p = frontier.back();
      frontier.pop_back();
      for (std::uint32_t q : neighbors_of(p)) {
        if (result.labels[q] != kUnassigned) continue;
        result.labels[q] = cluster;
        if (core[q]) frontier.push_back(q);
      }
    }
    ++cluster;
  }
  for (Label& l : result.labels) {
    if (l == kUnassigned) l = kNoiseLabel;
  }
  result.cluster_count = static_cast<std::size_t>(cluster);
  result.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<double> sorted_k_distances(const EncodedDataset& data, std::size_t min_samples) {
  const std::size_t n = data.size();
  std::vector<double> out;
  if (n == 0) return out;
  const std::size_t k = std::clamp<std::size_t>(min_samples, 1, n);
  out.reserve(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = i == j ? 0.0 : data.distance(i, j);
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    out.push_back(row[k - 1]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t knee_index(const std::vector<double>& ascending) {
  if (ascending.size() < 3) return 0;
  const double lo = ascending.front();
  const double span = ascending.back() - lo;
  if (span <= 0.0) return 0;
  const double last = static_cast<double>(ascending.size() - 1);
  std::size_t best = 0;
  double best_gap = 0.0;
  for (std::size_t i = 0; i < ascending.size(); ++i) {
    const double gap = static_cast<double>(i) / last - (ascending[i] - lo) / span;
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

double signature_distance_floor(std::int64_t objects_per_event, std::int64_t similarity_pct) {
  const std::int64_t common = shared_object_count(objects_per_event, similarity_pct);
  return jaccard_distance_from_counts(static_cast<std::size_t>(common),
                                      static_cast<std::size_t>(2 * objects_per_event - common));
}

double signature_eps(std::int64_t objects_per_event, std::int64_t similarity_pct) {
  const std::int64_t common = shared_object_count(objects_per_event, similarity_pct);
  const double floor = signature_distance_floor(objects_per_event, similarity_pct);
  if (common == 0) return 1.0;
  const double next = jaccard_distance_from_counts(static_cast<std::size_t>(common - 1),
                                                   static_cast<std::size_t>(2 * objects_per_event - common + 1));
  return (floor + next) / 2.0;
}

DbscanConfig suggest_config(const EncodedDataset& data, const std::optional<GenerationParams>& hint) {
  DbscanConfig config;
  if (hint) {
    config.min_samples = static_cast<std::size_t>(std::max<std::int64_t>(2, hint->events_per_signature));
    config.eps = signature_eps(hint->objects_per_event, hint->similarity_pct);
    return config;
  }
  config.min_samples = 4;
  const std::vector<double> curve = sorted_k_distances(data, config.min_samples);
  double eps = curve.empty() ? 1.0 : curve[knee_index(curve)];
  if (eps <= 0.0) eps = 1e-9;
  config.eps = std::min(eps, 1.0);
  return config;
}

}  // namespace sigbench
