#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sigbench/event_model.hpp"
#include "sigbench/rng.hpp"

namespace sigbench {

// The seven generation parameters plus the RNG seed. Defaults are the minima
// of the benchmark grid.
struct GenerationParams {
  std::int64_t num_signatures = 10;
  std::int64_t events_per_signature = 10;
  std::int64_t objects_per_event = 5;
  std::int64_t similarity_pct = 20;
  std::int64_t total_events = 10000;
  std::int64_t num_unique_objects = 100;
  std::int64_t repetitions = 1;
  std::uint64_t seed = 1;

  // Full check, including the pool-size and event-budget constraints.
  // Throws InvalidParameter naming the violated constraint.
  void validate() const;

  // Only the constraints needed to build signatures from a given pool size.
  void validate_signature_shape(std::size_t pool_size) const;

  // S * L * r; throws InvalidParameter on overflow.
  std::int64_t signature_event_count() const;
  std::int64_t noise_event_count() const { return total_events - signature_event_count(); }

  // Stable "S=..,L=..,..." rendering used in messages and cell keys.
  std::string to_string() const;

  friend auto operator<=>(const GenerationParams&, const GenerationParams&) = default;
};

// Knobs that are not part of the seven-parameter recipe.
struct GeneratorOptions {
  std::uint32_t type_id_min = 1;
  std::uint32_t type_id_max = 1000;
  // 2025-05-01T09:00:00Z
  std::int64_t base_epoch_ms = 1746090000000;
  std::int64_t timestamp_step_ms = 1000;
};

struct GeneratedLog {
  Dataset dataset;
  GroundTruth truth;
};

// Events paired with their labels, in generation order.
struct LabelledEvents {
  std::vector<Event> events;
  std::vector<Label> labels;
};

// [object1, ..., objectN]. Throws InvalidParameter when n < 1.
std::vector<ObjectId> generate_objects(std::int64_t n);

// round_half_up(objects_per_event * similarity_pct / 100).
std::int64_t shared_object_count(std::int64_t objects_per_event, std::int64_t similarity_pct);

// Signature events for labels 0..S-1; signature s emits r*L events, all
// containing the same common set C_s plus per-event objects drawn from
// objects \ C_s. Draw order: every C_s, then per-event objects, then type ids.
LabelledEvents generate_signatures(const GenerationParams& params, std::span<const ObjectId> objects,
                                   Rng& rng, const GeneratorOptions& options = {});

// count events of objects_per_event distinct objects each; per-event objects
// are drawn first, then type ids.
std::vector<Event> generate_noise(std::int64_t count, std::span<const ObjectId> objects,
                                  std::int64_t objects_per_event, Rng& rng,
                                  const GeneratorOptions& options = {});

// Signatures and noise combined, shuffled with the seed, timestamps assigned
// in final order.
GeneratedLog generate_dataset(const GenerationParams& params, const GeneratorOptions& options = {});

// Interleaves synthetic signatures into an existing log. Base events keep
// their content and relative order and are labelled noise. The object pool
// is base.object_universe; num_unique_objects and total_events are ignored.
GeneratedLog inject_signatures(const Dataset& base, const GenerationParams& params,
                               const GeneratorOptions& options = {});

}  // namespace sigbench
