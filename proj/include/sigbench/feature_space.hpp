#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sigbench/event_model.hpp"

namespace sigbench {

struct FeatureOptions {
  // Adds one pseudo-dimension per distinct type id after the object
  // dimensions. Off by default: clustering keys on shared objects only.
  bool include_type_id = false;
};

// One sparse binary vector per event over the lexicographically sorted
// object universe. Rows are kept both as sorted dimension lists and, for
// universes of up to kMaxDenseDimensions, as packed bitsets for fast
// intersection counts.
class EncodedDataset {
 public:
  static constexpr std::size_t kMaxDenseDimensions = 1024;

  std::size_t size() const noexcept { return offsets_.size() - 1; }
  std::size_t dimension_count() const noexcept { return dimension_count_; }

  // Object for a dimension index; only valid for object dimensions.
  const ObjectId& object_at(std::uint32_t dimension) const { return objects_[dimension]; }
  std::optional<std::uint32_t> index_of(const ObjectId& id) const;

  std::span<const std::uint32_t> row(std::size_t i) const {
    return {indices_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t row_size(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

  // |row(i) ∩ row(j)|.
  std::size_t shared_count(std::size_t i, std::size_t j) const;

  double distance(std::size_t i, std::size_t j) const;

  std::size_t max_row_size() const noexcept { return max_row_size_; }

 private:
  friend EncodedDataset encode(const Dataset&, const FeatureOptions&);

  std::vector<ObjectId> objects_;
  std::size_t dimension_count_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> indices_;
  std::size_t words_per_row_ = 0;  // 0 when dense rows are disabled
  std::vector<std::uint64_t> bits_;
  std::size_t max_row_size_ = 0;
};

EncodedDataset encode(const Dataset& dataset, const FeatureOptions& options = {});

// 1 - shared/union; 0 when both sets are empty.
inline double jaccard_distance_from_counts(std::size_t shared, std::size_t union_size) {
  if (union_size == 0) return 0.0;
  return 1.0 - static_cast<double>(shared) / static_cast<double>(union_size);
}

// Both inputs are sorted dimension lists from the same EncodedDataset.
double jaccard_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

}  // namespace sigbench
