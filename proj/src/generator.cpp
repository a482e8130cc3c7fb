#include "sigbench/generator.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "sigbench/error.hpp"

namespace sigbench {

namespace {

void require_positive(std::int64_t value, const char* name) {
  if (value < 1) {
    throw InvalidParameter(std::string(name) + " must be >= 1 (got " + std::to_string(value) + ")");
  }
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw InvalidParameter("num_signatures * events_per_signature * repetitions overflows");
  }
  return out;
}

ObjectSet pick(std::span<const ObjectId> pool, std::span<const std::uint32_t> positions,
               std::vector<ObjectId> base = {}) {
  base.reserve(base.size() + positions.size());
  for (std::uint32_t p : positions) base.push_back(pool[p]);
  return ObjectSet(std::move(base));
}

void assign_type_ids(std::span<Event> events, Rng& rng, const GeneratorOptions& options) {
  if (options.type_id_max < options.type_id_min) {
    throw InvalidParameter("type_id_max must be >= type_id_min");
  }
  for (Event& e : events) {
    e.type_id = static_cast<std::uint32_t>(rng.between(options.type_id_min, options.type_id_max));
  }
}

}  // namespace

void GenerationParams::validate_signature_shape(std::size_t pool_size) const {
  require_positive(num_signatures, "num_signatures");
  require_positive(events_per_signature, "events_per_signature");
  require_positive(objects_per_event, "objects_per_event");
  require_positive(repetitions, "repetitions");
  if (similarity_pct < 0 || similarity_pct > 100) {
    throw InvalidParameter("similarity_pct must be within 0..100 (got " +
                           std::to_string(similarity_pct) + ")");
  }
  if (static_cast<std::uint64_t>(objects_per_event) > pool_size) {
    throw InvalidParameter("objects_per_event (" + std::to_string(objects_per_event) +
                           ") exceeds the object pool size (" + std::to_string(pool_size) + ")");
  }
  (void)signature_event_count();
}

void GenerationParams::validate() const {
  require_positive(total_events, "total_events");
  require_positive(num_unique_objects, "num_unique_objects");
  validate_signature_shape(static_cast<std::size_t>(num_unique_objects));
  if (signature_event_count() > total_events) {
    throw InvalidParameter("signatures exceed total events (" +
                           std::to_string(signature_event_count()) + " signature events > " +
                           std::to_string(total_events) + " total events)");
  }
}

std::int64_t GenerationParams::signature_event_count() const {
  return checked_mul(checked_mul(num_signatures, events_per_signature), repetitions);
}

std::string GenerationParams::to_string() const {
  std::ostringstream os;
  os << "S=" << num_signatures << ",L=" << events_per_signature << ",m=" << objects_per_event
     << ",sim=" << similarity_pct << ",N=" << total_events << ",O=" << num_unique_objects
     << ",r=" << repetitions << ",seed=" << seed;
  return os.str();
}

std::vector<ObjectId> generate_objects(std::int64_t n) {
  require_positive(n, "number of objects");
  std::vector<ObjectId> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 1; i <= n; ++i) out.emplace_back("object" + std::to_string(i));
  return out;
}

std::int64_t shared_object_count(std::int64_t objects_per_event, std::int64_t similarity_pct) {
  if (similarity_pct < 0 || similarity_pct > 100) {
    throw InvalidParameter("similarity_pct must be within 0..100 (got " +
                           std::to_string(similarity_pct) + ")");
  }
  if (objects_per_event < 0) throw InvalidParameter("objects_per_event must be non-negative");
  return (objects_per_event * similarity_pct + 50) / 100;
}

LabelledEvents generate_signatures(const GenerationParams& params, std::span<const ObjectId> objects,
                                   Rng& rng, const GeneratorOptions& options) {
  params.validate_signature_shape(objects.size());
  const auto signatures = static_cast<std::size_t>(params.num_signatures);
  const auto per_instance = static_cast<std::size_t>(params.events_per_signature);
  const auto reps = static_cast<std::size_t>(params.repetitions);
  const auto m = static_cast<std::size_t>(params.objects_per_event);
  const auto common = static_cast<std::size_t>(
      shared_object_count(params.objects_per_event, params.similarity_pct));
  const std::size_t specific = m - common;

  std::vector<std::vector<std::uint32_t>> common_sets(signatures);
  PoolSampler whole(objects.size());
  for (auto& c : common_sets) {
    auto drawn = whole.draw(common, rng);
    c.assign(drawn.begin(), drawn.end());
  }

  LabelledEvents out;
  out.events.reserve(signatures * reps * per_instance);
  out.labels.reserve(signatures * reps * per_instance);
  std::vector<bool> in_common(objects.size());
  std::vector<ObjectId> rest;
  for (std::size_t s = 0; s < signatures; ++s) {
    std::fill(in_common.begin(), in_common.end(), false);
    std::vector<ObjectId> common_ids;
    for (std::uint32_t p : common_sets[s]) {
      in_common[p] = true;
      common_ids.push_back(objects[p]);
    }
    rest.clear();
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (!in_common[i]) rest.push_back(objects[i]);
    }
    PoolSampler sampler(rest.size());
    for (std::size_t k = 0; k < reps * per_instance; ++k) {
      Event e;
      e.objects = pick(rest, sampler.draw(specific, rng), common_ids);
      out.events.push_back(std::move(e));
      out.labels.push_back(static_cast<Label>(s));
    }
  }
  assign_type_ids(out.events, rng, options);
  return out;
}

std::vector<Event> generate_noise(std::int64_t count, std::span<const ObjectId> objects,
                                  std::int64_t objects_per_event, Rng& rng,
                                  const GeneratorOptions& options) {
  if (count < 0) {
    throw InvalidParameter("noise event count must be non-negative (got " + std::to_string(count) +
                           ")");
  }
  require_positive(objects_per_event, "objects_per_event");
  if (static_cast<std::uint64_t>(objects_per_event) > objects.size()) {
    throw InvalidParameter("objects_per_event (" + std::to_string(objects_per_event) +
                           ") exceeds the object pool size (" + std::to_string(objects.size()) +
                           ")");
  }
  std::vector<Event> out(static_cast<std::size_t>(count));
  PoolSampler sampler(objects.size());
  for (Event& e : out) {
    e.objects = pick(objects, sampler.draw(static_cast<std::size_t>(objects_per_event), rng));
  }
  assign_type_ids(out, rng, options);
  return out;
}

GeneratedLog generate_dataset(const GenerationParams& params, const GeneratorOptions& options) {
  params.validate();
  const std::vector<ObjectId> objects = generate_objects(params.num_unique_objects);
  Rng rng(params.seed);

  LabelledEvents combined = generate_signatures(params, objects, rng, options);
  std::vector<Event> noise =
      generate_noise(params.noise_event_count(), objects, params.objects_per_event, rng, options);
  for (Event& e : noise) {
    combined.events.push_back(std::move(e));
    combined.labels.push_back(kNoiseLabel);
  }

  std::vector<std::uint32_t> order(combined.events.size());
  std::iota(order.begin(), order.end(), std::uint32_t{0});
  rng.shuffle(std::span<std::uint32_t>(order));

  GeneratedLog out;
  out.dataset.object_universe = ObjectSet(objects);
  out.dataset.events.reserve(order.size());
  out.truth.labels.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    Event e = std::move(combined.events[order[i]]);
    e.timestamp_ms = options.base_epoch_ms + static_cast<std::int64_t>(i) * options.timestamp_step_ms;
    out.dataset.events.push_back(std::move(e));
    out.truth.labels.push_back(combined.labels[order[i]]);
  }
  return out;
}

GeneratedLog inject_signatures(const Dataset& base, const GenerationParams& params,
                               const GeneratorOptions& options) {
  if (base.events.empty()) throw InvalidParameter("base dataset has no events");
  const std::span<const ObjectId> pool = base.object_universe.items();
  Rng rng(params.seed);
  LabelledEvents synthetic = generate_signatures(params, pool, rng, options);

  const std::size_t merged_size = base.events.size() + synthetic.events.size();
  PoolSampler slots(merged_size);
  auto drawn = slots.draw(synthetic.events.size(), rng);
  std::vector<bool> is_synthetic(merged_size, false);
  for (std::uint32_t p : drawn) is_synthetic[p] = true;

  GeneratedLog out;
  out.dataset.object_universe = base.object_universe;
  out.dataset.events.reserve(merged_size);
  out.truth.labels.reserve(merged_size);
  std::size_t next_base = 0;
  std::size_t next_synthetic = 0;
  for (std::size_t i = 0; i < merged_size; ++i) {
    if (is_synthetic[i]) {
      Event e = std::move(synthetic.events[next_synthetic]);
      // Inherit the surrounding base time so a time-sorted base stays sorted.
      const std::size_t anchor = next_base == 0 ? 0 : next_base - 1;
      e.timestamp_ms = base.events[anchor].timestamp_ms;
      out.dataset.events.push_back(std::move(e));
      out.truth.labels.push_back(synthetic.labels[next_synthetic]);
      ++next_synthetic;
    } else {
      out.dataset.events.push_back(base.events[next_base++]);
      out.truth.labels.push_back(kNoiseLabel);
    }
  }
  return out;
}

}  // namespace sigbench
