#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sigbench/error.hpp"
#include "sigbench/feature_space.hpp"
#include "sigbench/generator.hpp"
#include "sigbench/rng.hpp"

using namespace sigbench;

namespace {

ObjectSet set_of(std::initializer_list<const char*> names) {
  std::vector<ObjectId> ids;
  for (const char* n : names) ids.emplace_back(n);
  return ObjectSet(std::move(ids));
}

Dataset random_dataset(Rng& rng, std::size_t universe, std::size_t events, std::size_t max_size) {
  Dataset d;
  auto objects = generate_objects(static_cast<std::int64_t>(universe));
  d.object_universe = ObjectSet(objects);
  for (std::size_t i = 0; i < events; ++i) {
    std::vector<ObjectId> pick;
    std::size_t k = rng.below(max_size + 1);
    PoolSampler pool(universe);
    for (auto p : pool.draw(k, rng)) pick.push_back(objects[p]);
    d.events.push_back({0, 1, ObjectSet(std::move(pick))});
  }
  return d;
}

}  // namespace

TEST(Encode, DirectConstruction) {
  Dataset d;
  d.object_universe = set_of({"object1", "object2", "object3"});
  d.events.push_back({0, 1, set_of({"object1", "object3"})});
  auto enc = encode(d);
  ASSERT_EQ(enc.size(), 1u);
  EXPECT_EQ(enc.dimension_count(), 3u);
  auto row = enc.row(0);
  EXPECT_EQ(std::vector<std::uint32_t>(row.begin(), row.end()), (std::vector<std::uint32_t>{0, 2}));
  EXPECT_EQ(enc.index_of(ObjectId("object2")), 1u);
  EXPECT_FALSE(enc.index_of(ObjectId("nope")).has_value());
}

TEST(Encode, IndexIndependentOfInsertionOrder) {
  Rng rng(21);
  auto objects = generate_objects(50);
  for (int trial = 0; trial < 20; ++trial) {
    auto shuffled = objects;
    rng.shuffle(std::span<ObjectId>(shuffled));
    Dataset a, b;
    a.object_universe = ObjectSet(objects);
    b.object_universe = ObjectSet(shuffled);
    auto ea = encode(a), eb = encode(b);
    for (std::uint32_t d = 0; d < 50; ++d) EXPECT_EQ(ea.object_at(d), eb.object_at(d));
  }
}

TEST(Encode, SetBitCountMatchesObjectCount) {
  Rng rng(5);
  auto d = random_dataset(rng, 40, 300, 12);
  auto enc = encode(d);
  std::size_t bits = 0, objects = 0;
  for (std::size_t i = 0; i < enc.size(); ++i) bits += enc.row_size(i);
  for (const auto& e : d.events) objects += e.objects.size();
  EXPECT_EQ(bits, objects);
}

TEST(Encode, RejectsObjectOutsideUniverse) {
  Dataset d;
  d.object_universe = set_of({"a"});
  d.events.push_back({0, 1, set_of({"b"})});
  EXPECT_THROW(encode(d), InvalidInput);
}

TEST(Encode, TypeIdDimensions) {
  Dataset d;
  d.object_universe = set_of({"a", "b"});
  d.events.push_back({0, 7, set_of({"a"})});
  d.events.push_back({0, 7, set_of({"b"})});
  d.events.push_back({0, 9, set_of({"b"})});
  FeatureOptions opts;
  opts.include_type_id = true;
  auto enc = encode(d, opts);
  EXPECT_EQ(enc.dimension_count(), 4u);
  EXPECT_DOUBLE_EQ(enc.distance(0, 1), 1.0 - 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(enc.distance(1, 2), 1.0 - 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(encode(d).distance(1, 2), 0.0);
}

TEST(Jaccard, WorkedPair) {
  Dataset d;
  d.object_universe = set_of({"o1", "o2", "o3", "o4", "o5", "o6", "o7"});
  d.events.push_back({0, 1, set_of({"o1", "o2", "o3", "o4", "o5"})});
  d.events.push_back({0, 1, set_of({"o1", "o2", "o3", "o6", "o7"})});
  auto enc = encode(d);
  EXPECT_NEAR(enc.distance(0, 1), 4.0 / 7.0, 1e-12);
  EXPECT_EQ(enc.distance(0, 0), 0.0);
}

TEST(Jaccard, Bounds) {
  std::vector<std::uint32_t> a{1, 2}, b{3, 4}, e;
  EXPECT_EQ(jaccard_distance(a, a), 0.0);
  EXPECT_EQ(jaccard_distance(a, b), 1.0);
  EXPECT_EQ(jaccard_distance(e, e), 0.0);
  EXPECT_EQ(jaccard_distance(a, e), 1.0);
}

// Both storage paths: a small universe uses bitsets, a large one sorted indices.
class JaccardProperties : public ::testing::TestWithParam<std::size_t> {};

TEST_P(JaccardProperties, MatchesOracleAndIsAMetric) {
  Rng rng(GetParam());
  auto d = random_dataset(rng, GetParam(), 60, 10);
  auto enc = encode(d);
  const std::size_t n = enc.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dij = enc.distance(i, j);
      ASSERT_DOUBLE_EQ(dij, oracle::jaccard(oracle::names(d.events[i]), oracle::names(d.events[j])));
      ASSERT_EQ(dij, enc.distance(j, i));
      ASSERT_GE(dij, 0.0);
      ASSERT_LE(dij, 1.0);
      ASSERT_EQ(enc.shared_count(i, j), set_overlap(d.events[i].objects, d.events[j].objects).shared);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        ASSERT_LE(enc.distance(i, k), enc.distance(i, j) + enc.distance(j, k) + 1e-12);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Universe, JaccardProperties, ::testing::Values(15, 300, 2000));
