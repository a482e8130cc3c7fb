#include "sigbench/event_model.hpp"

#include <algorithm>

#include "sigbench/error.hpp"

namespace sigbench {

ObjectId::ObjectId(std::string value) : value_(std::move(value)) {
  if (value_.empty()) {
    throw InvalidInput("object identifier must be non-empty");
  }
}

ObjectSet::ObjectSet(std::vector<ObjectId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  auto dup = std::adjacent_find(ids_.begin(), ids_.end());
  if (dup != ids_.end()) {
    throw InvalidInput("duplicate object '" + dup->str() + "' in object set");
  }
}

ObjectSet ObjectSet::from_any(std::vector<ObjectId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  ObjectSet out;
  out.ids_ = std::move(ids);
  return out;
}

bool ObjectSet::contains(const ObjectId& id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < events.size(); ++i) {
    for (const ObjectId& id : events[i].objects) {
      if (!object_universe.contains(id)) {
        throw InvalidInput("event " + std::to_string(i) + " references object '" + id.str() +
                           "' outside the object universe");
      }
    }
  }
}

std::size_t GroundTruth::signature_count() const {
  Label max_label = kNoiseLabel;
  for (Label l : labels) {
    if (l < kNoiseLabel) {
      throw InvalidInput("ground-truth label " + std::to_string(l) + " is not valid");
    }
    max_label = std::max(max_label, l);
  }
  const auto count = static_cast<std::size_t>(max_label + 1);
  std::vector<bool> seen(count, false);
  for (Label l : labels) {
    if (l >= 0) seen[static_cast<std::size_t>(l)] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw InvalidInput("signature labels do not form a contiguous range 0..S-1");
  }
  return count;
}

Overlap set_overlap(const ObjectSet& a, const ObjectSet& b) {
  std::size_t shared = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return {shared, a.size() + b.size() - shared};
}

Overlap event_overlap(const Event& a, const Event& b) { return set_overlap(a.objects, b.objects); }

}  // namespace sigbench
