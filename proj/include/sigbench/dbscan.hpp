#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sigbench/event_model.hpp"
#include "sigbench/feature_space.hpp"
#include "sigbench/generator.hpp"

namespace sigbench {

struct DbscanConfig {
  double eps = 0.5;
  // Neighbourhood size, counting the point itself, that makes a point core.
  std::size_t min_samples = 4;

  // Throws InvalidParameter unless 0 < eps <= 1 and min_samples >= 1.
  void validate() const;

  friend bool operator==(const DbscanConfig&, const DbscanConfig&) = default;
};

struct DbscanOptions {
  // Worker threads for the pairwise neighbourhood pass. Expansion is always
  // sequential so labels do not depend on this value.
  unsigned threads = 1;
  // Upper bound on materialised neighbour entries; past it, neighbourhoods
  // of core points are recomputed on demand during expansion.
  std::size_t max_stored_neighbors = std::size_t{1} << 26;
};

struct ClusteringResult {
  std::vector<Label> labels;  // kNoiseLabel for noise
  std::size_t cluster_count = 0;
  double wall_time_ms = 0.0;

  std::size_t noise_count() const;
};

// DBSCAN under Jaccard distance. A point is core when at least min_samples
// points (itself included) lie within eps. Clusters are numbered in scan
// order of their first core point; a border point joins the lowest-numbered
// cluster among its core neighbours.
ClusteringResult dbscan(const EncodedDataset& data, const DbscanConfig& config,
                        const DbscanOptions& options = {});

// Per point, the smallest eps at which it would be core for the given
// min_samples: the min_samples-th smallest distance counting the zero
// distance to itself. Returned sorted ascending.
std::vector<double> sorted_k_distances(const EncodedDataset& data, std::size_t min_samples);

// Index of the maximum-curvature point of an ascending curve: after scaling
// both axes to [0,1], the point farthest below the chord from the first to
// the last sample. Ties resolve to the lowest index. Empty input -> 0.
std::size_t knee_index(const std::vector<double>& ascending);

// Largest Jaccard distance two events of one signature can have: they share
// only the common set, so distance = 1 - c / (2m - c).
double signature_distance_floor(std::int64_t objects_per_event, std::int64_t similarity_pct);

// eps that admits every same-signature pair of m-object events and nothing
// sharing one object fewer: the midpoint between the floor distance (c
// shared) and the distance at c - 1 shared, both over m-object events.
// 1.0 when the common set is empty.
double signature_eps(std::int64_t objects_per_event, std::int64_t similarity_pct);

// With a generation hint: min_samples = max(2, events_per_signature) and
// eps = signature_eps(m, similarity). Without one: min_samples = 4 and eps
// is the knee of the sorted k-distance curve (1e-9 when the knee sits at 0).
DbscanConfig suggest_config(const EncodedDataset& data,
                            const std::optional<GenerationParams>& hint);

}  // namespace sigbench
