#include "doctest.h"
#include "knn_fixture.hpp"
#include "oracles.hpp"

#include "histo/error.hpp"
#include "histo/retrieval.hpp"

using namespace histo;

namespace {

LabeledSample sample(const std::string& id, int label, std::initializer_list<double> values) {
  LabeledSample s{id, "p-" + id, label, {}};
  s.descriptor.values.resize(Eigen::Index(values.size()));
  Eigen::Index i = 0;
  for (double v : values) s.descriptor.values[i++] = v;
  return s;
}

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected histo::Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("index construction") {
  const SearchIndex one = build_index({sample("a", 1, {1, 2})});
  CHECK(one.size() == 1);
  CHECK(kind_of([] { build_index({}); }) == ErrorKind::EmptyTrainingSet);
  CHECK(kind_of([] { build_index({sample("a", 1, {1, 2}), sample("b", 0, {1, 2, 3})}); }) ==
        ErrorKind::HeterogeneousDescriptors);
  CHECK(kind_of([] { build_index({sample("a", 1, {1, 2}), sample("a", 0, {3, 4})}); }) == ErrorKind::InvalidArgument);

  std::mt19937_64 rng(0);
  CHECK(build_index(random_index(1365, 4, rng)).size() == 1365);
}

TEST_CASE("query examples") {
  const SearchIndex one = build_index({sample("a", 1, {1, 2})});
  const auto hit = query(one, sample("q", 0, {5, 5}).descriptor, 1, DistanceKind::L1);
  REQUIRE(hit.size() == 1);
  CHECK(hit[0].sample_id == "a");

  std::mt19937_64 rng(1);
  const SearchIndex idx = build_index(random_index(30, 8, rng));
  const auto self = query(idx, idx.samples()[17].descriptor, 3, DistanceKind::L2);
  CHECK(self[0].distance == 0.0);
  CHECK(idx.samples()[self[0].position].descriptor.values == idx.samples()[17].descriptor.values);

  CHECK(kind_of([&] { query(idx, idx.samples()[0].descriptor, 0, DistanceKind::L1); }) == ErrorKind::KOutOfRange);
  CHECK(kind_of([&] { query(idx, idx.samples()[0].descriptor, 31, DistanceKind::L1); }) == ErrorKind::KOutOfRange);
  CHECK(kind_of([&] { query(idx, sample("q", 0, {1}).descriptor, 1, DistanceKind::L1); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("query matches the exhaustive-sort oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const SearchIndex idx = build_index(random_index(50, 6, rng));
    std::vector<Eigen::VectorXd> raw;
    for (const auto& s : idx.samples()) raw.push_back(s.descriptor.values);
    const Descriptor probe = idx.samples()[rng() % 50].descriptor;
    for (auto kind : kAllDistanceKinds) {
      const auto got = query(idx, probe, 5, kind);
      const auto want = oracle::knn(raw, probe.values, std::string(to_token(kind)), 5);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].position == want[i].position);
        CHECK(got[i].distance == doctest::Approx(want[i].distance).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("full query is sorted and prefix-consistent") {
  std::mt19937_64 rng(3);
  const SearchIndex idx = build_index(random_index(40, 5, rng));
  const Descriptor probe = idx.samples()[3].descriptor;
  for (auto kind : kAllDistanceKinds) {
    const auto all = query(idx, probe, 40, kind);
    for (std::size_t i = 1; i < all.size(); ++i) {
      CHECK(all[i - 1].distance <= all[i].distance);
      if (all[i - 1].distance == all[i].distance) CHECK(all[i - 1].position < all[i].position);
    }
    for (int k = 1; k < 40; ++k) {
      const auto part = query(idx, probe, k, kind);
      for (std::size_t i = 0; i < part.size(); ++i) CHECK(part[i].position == all[i].position);
    }
  }
}

TEST_CASE("undefined distances are skipped") {
  const SearchIndex idx = build_index({sample("zero", 1, {0, 0}), sample("a", 0, {1, 0}), sample("b", 1, {0, 1})});
  const auto hits = query(idx, sample("q", 0, {1, 1}).descriptor, 2, DistanceKind::Cosine);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].sample_id == "a");
  CHECK(hits[1].sample_id == "b");
  CHECK(kind_of([&] { query(idx, sample("q", 0, {1, 1}).descriptor, 3, DistanceKind::Cosine); }) ==
        ErrorKind::DegenerateQuery);
}

TEST_CASE("classify examples") {
  const SearchIndex idx = build_index({sample("a", 1, {0}), sample("b", 1, {1}), sample("c", 0, {2})});
  CHECK(classify({{"a", 0.1, 0}, {"b", 0.2, 1}, {"c", 0.3, 2}}, idx) == 1);
  CHECK(classify({{"b", 0.5, 1}, {"c", 0.2, 2}}, idx) == 0);
  CHECK(classify({{"c", 0.2, 2}, {"b", 0.2, 1}}, idx) == 1);  // equal distances: earlier position wins
  CHECK(kind_of([&] { classify({}, idx); }) == ErrorKind::EmptyNeighborList);
}

TEST_CASE("classify equals a recounted vote") {
  std::mt19937_64 rng(4);
  const SearchIndex idx = build_index(random_index(120, 6, rng));
  std::vector<Descriptor> probes;
  for (int t = 0; t < 40; ++t) probes.push_back(random_index(1, 6, rng).front().descriptor);
  for (auto kind : kAllDistanceKinds) {
    const auto batch = classify_all(idx, probes, 15, kind, 4);
    for (std::size_t t = 0; t < probes.size(); ++t) {
      const auto hits = query(idx, probes[t], 15, kind);
      int ones = 0;
      for (const auto& h : hits) ones += idx.samples()[h.position].label;
      const int expect = ones * 2 > 15 ? 1 : 0;
      CHECK(classify(hits, idx) == expect);
      CHECK(batch[t] == expect);
    }
  }
}

TEST_CASE("a training sample classifies as itself with k = 1") {
  std::mt19937_64 rng(5);
  auto samples = random_index(60, 6, rng);
  // Drop duplicates so that every sample is its own unique nearest neighbour.
  std::vector<LabeledSample> unique;
  for (auto& s : samples) {
    bool dup = false;
    for (const auto& u : unique) dup = dup || u.descriptor.values == s.descriptor.values;
    if (!dup) unique.push_back(s);
  }
  const SearchIndex idx = build_index(unique);
  for (const auto& s : idx.samples()) CHECK(classify(query(idx, s.descriptor, 1, DistanceKind::L2), idx) == s.label);
}
