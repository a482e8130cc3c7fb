#include "sigbench/feature_space.hpp"

#include <algorithm>
#include <bit>
#include <map>

#include "sigbench/error.hpp"

namespace sigbench {

namespace {

std::size_t sorted_intersection(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  std::size_t shared = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++shared;
      ++i;
      ++j;
    }
  }
  return shared;
}

}  // namespace

std::optional<std::uint32_t> EncodedDataset::index_of(const ObjectId& id) const {
  auto it = std::lower_bound(objects_.begin(), objects_.end(), id);
  if (it == objects_.end() || *it != id) return std::nullopt;
  return static_cast<std::uint32_t>(it - objects_.begin());
}

std::size_t EncodedDataset::shared_count(std::size_t i, std::size_t j) const {
  if (words_per_row_ != 0) {
    const std::uint64_t* a = bits_.data() + i * words_per_row_;
    const std::uint64_t* b = bits_.data() + j * words_per_row_;
    std::size_t shared = 0;
    for (std::size_t w = 0; w < words_per_row_; ++w) {
      shared += static_cast<std::size_t>(std::popcount(a[w] & b[w]));
    }
    return shared;
  }
  return sorted_intersection(row(i), row(j));
}

double EncodedDataset::distance(std::size_t i, std::size_t j) const {
  const std::size_t shared = shared_count(i, j);
  return jaccard_distance_from_counts(shared, row_size(i) + row_size(j) - shared);
}

EncodedDataset encode(const Dataset& dataset, const FeatureOptions& options) {
  EncodedDataset out;
  const auto universe = dataset.object_universe.items();
  out.objects_.assign(universe.begin(), universe.end());

  std::map<std::uint32_t, std::uint32_t> type_dims;
  if (options.include_type_id) {
    for (const Event& e : dataset.events) type_dims.emplace(e.type_id, 0);
    std::uint32_t next = static_cast<std::uint32_t>(out.objects_.size());
    for (auto& [type, dim] : type_dims) dim = next++;
  }
  out.dimension_count_ = out.objects_.size() + type_dims.size();

  out.offsets_.reserve(dataset.events.size() + 1);
  for (const Event& e : dataset.events) {
    // Event objects and the universe share one ordering, so a forward merge
    // yields sorted indices without per-object searches.
    auto cursor = out.objects_.begin();
    for (const ObjectId& id : e.objects) {
      cursor = std::lower_bound(cursor, out.objects_.end(), id);
      if (cursor == out.objects_.end() || *cursor != id) {
        throw InvalidInput("object '" + id.str() + "' is not in the object universe");
      }
      out.indices_.push_back(static_cast<std::uint32_t>(cursor - out.objects_.begin()));
    }
    if (options.include_type_id) out.indices_.push_back(type_dims.at(e.type_id));
    out.offsets_.push_back(out.indices_.size());
    out.max_row_size_ = std::max(out.max_row_size_, out.offsets_.back() - out.offsets_[out.offsets_.size() - 2]);
  }

  if (out.dimension_count_ <= EncodedDataset::kMaxDenseDimensions && out.dimension_count_ > 0) {
    out.words_per_row_ = (out.dimension_count_ + 63) / 64;
    out.bits_.assign(out.size() * out.words_per_row_, 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::uint64_t* row_bits = out.bits_.data() + i * out.words_per_row_;
      for (std::uint32_t d : out.row(i)) row_bits[d / 64] |= std::uint64_t{1} << (d % 64);
    }
  }
  return out;
}

double jaccard_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  const std::size_t shared = sorted_intersection(a, b);
  return jaccard_distance_from_counts(shared, a.size() + b.size() - shared);
}

}  // namespace sigbench
