#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sigbench {

using Label = std::int32_t;

// Reserved ground-truth / prediction label for events outside any signature.
inline constexpr Label kNoiseLabel = -1;

// Opaque object identifier. Synthetic objects are named "object<N>"; imported
// logs may carry any non-empty string.
class ObjectId {
 public:
  // Throws InvalidInput when value is empty.
  explicit ObjectId(std::string value);

  const std::string& str() const noexcept { return value_; }

  friend bool operator==(const ObjectId&, const ObjectId&) = default;
  friend std::strong_ordering operator<=>(const ObjectId& a, const ObjectId& b) {
    return a.value_.compare(b.value_) <=> 0;
  }

 private:
  std::string value_;
};

// Sorted, duplicate-free collection of object identifiers.
class ObjectSet {
 public:
  ObjectSet() = default;

  // Sorts ids; throws InvalidInput when an identifier appears twice.
  explicit ObjectSet(std::vector<ObjectId> ids);

  // Like the constructor but silently drops repeated identifiers.
  static ObjectSet from_any(std::vector<ObjectId> ids);

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  bool contains(const ObjectId& id) const;

  std::span<const ObjectId> items() const noexcept { return ids_; }
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }
  const ObjectId& operator[](std::size_t i) const { return ids_[i]; }

  friend bool operator==(const ObjectSet&, const ObjectSet&) = default;

 private:
  std::vector<ObjectId> ids_;
};

struct Event {
  std::int64_t timestamp_ms = 0;
  std::uint32_t type_id = 0;
  ObjectSet objects;

  friend bool operator==(const Event&, const Event&) = default;
};

// The events list order is the canonical event index shared with GroundTruth.
struct Dataset {
  std::vector<Event> events;
  ObjectSet object_universe;

  // Throws InvalidInput if any event references an object outside the universe.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// One label per event index: kNoiseLabel for noise, 0..S-1 for signatures.
struct GroundTruth {
  std::vector<Label> labels;

  // Number of distinct signature labels; throws InvalidInput when the
  // signature labels are not the contiguous range 0..S-1.
  std::size_t signature_count() const;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Overlap {
  std::size_t shared = 0;
  std::size_t union_size = 0;

  friend bool operator==(const Overlap&, const Overlap&) = default;
};

// |a ∩ b| and |a ∪ b| of the two events' object sets.
Overlap event_overlap(const Event& a, const Event& b);
Overlap set_overlap(const ObjectSet& a, const ObjectSet& b);

}  // namespace sigbench

template <>
struct std::hash<sigbench::ObjectId> {
  std::size_t operator()(const sigbench::ObjectId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
