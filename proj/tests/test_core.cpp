#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "dqf/core.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace dqf;

namespace {

std::string fvecs_record(std::int32_t d, std::vector<float> values) {
  std::string out(reinterpret_cast<const char*>(&d), 4);
  out.append(reinterpret_cast<const char*>(values.data()), values.size() * 4);
  return out;
}

}  // namespace

TEST_CASE("distance basics") {
  const std::vector<float> x{1.5f, -2.0f, 7.0f};
  CHECK(distance(x, x) == 0.0f);
  const std::vector<float> o{0, 0}, p{3, 4};
  CHECK(distance(o, p) == doctest::Approx(5.0));
  CHECK(distance(p, o) == distance(o, p));
  CHECK_THROWS_AS(distance(x, p), std::invalid_argument);
}

TEST_CASE("distance matches double accumulation on random pairs") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto a = testing::random_vector(64, rng), b = testing::random_vector(64, rng);
    const double ref = oracle::distance_f64(a, b);
    CHECK(std::abs(distance(a, b) - ref) <= 1e-4 * ref);
  }
}

TEST_CASE("distance is a metric on random triples") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const auto a = testing::random_vector(8, rng), b = testing::random_vector(8, rng),
               c = testing::random_vector(8, rng);
    CHECK(distance(a, b) > 0.0f);
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-5f);
  }
}

TEST_CASE("dataset rejects bad shapes and non-finite values") {
  CHECK_THROWS_AS(VectorDataset(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(VectorDataset(3, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(VectorDataset(2, {1, NAN}), std::invalid_argument);
  CHECK_THROWS_AS(VectorDataset(1, {INFINITY}), std::invalid_argument);
  const VectorDataset ds(2, {1, 2, 3, 4, 5, 6});
  CHECK(ds.count() == 3);
  const std::vector<NodeId> pick{2, 0};
  const auto sub = ds.subset(pick);
  CHECK(sub.row(0)[0] == 5.0f);
  CHECK(sub.row(1)[1] == 2.0f);
  const std::vector<NodeId> bad{3};
  CHECK_THROWS_AS(ds.subset(bad), std::invalid_argument);
}

TEST_CASE("fvecs single record and round trip") {
  testing::TempDir dir("core");
  testing::write_bytes(dir / "one.fvecs", fvecs_record(4, {1, 2, 3, 4}));
  const auto one = load_fvecs(dir / "one.fvecs");
  CHECK(one.count() == 1);
  CHECK(one.dim() == 4);
  CHECK(one.row(0)[3] == 4.0f);

  const auto ds = testing::gaussian(257, 7, 9);
  write_fvecs(dir / "rt.fvecs", ds);
  const auto back = load_fvecs(dir / "rt.fvecs");
  REQUIRE(back.count() == ds.count());
  CHECK(std::memcmp(back.data().data(), ds.data().data(), ds.data().size_bytes()) == 0);
  CHECK(back.digest() == ds.digest());
}

TEST_CASE("fvecs load errors name the failing record offset") {
  testing::TempDir dir("core");
  const std::string good = fvecs_record(2, {1, 2});

  testing::write_bytes(dir / "trunc.fvecs", good + fvecs_record(2, {3, 4}).substr(0, 9));
  try {
    load_fvecs(dir / "trunc.fvecs");
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(e.offset() == good.size());
  }

  testing::write_bytes(dir / "dims.fvecs", good + fvecs_record(3, {1, 2, 3}));
  try {
    load_fvecs(dir / "dims.fvecs");
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(e.offset() == good.size());
  }

  testing::write_bytes(dir / "nan.fvecs", good + good + fvecs_record(2, {1, NAN}));
  try {
    load_fvecs(dir / "nan.fvecs");
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(e.offset() == 2 * good.size());
  }

  testing::write_bytes(dir / "header.fvecs", good + "ab");
  CHECK_THROWS_AS(load_fvecs(dir / "header.fvecs"), LoadError);
  testing::write_bytes(dir / "empty.fvecs", "");
  CHECK_THROWS_AS(load_fvecs(dir / "empty.fvecs"), LoadError);
  CHECK_THROWS_AS(load_fvecs(dir / "missing.fvecs"), LoadError);
}

TEST_CASE("ivecs round trip") {
  testing::TempDir dir("core");
  const std::vector<std::vector<std::int32_t>> rows{{1, 2, 3}, {7, 8, 9}};
  write_ivecs(dir / "gt.ivecs", rows);
  CHECK(load_ivecs(dir / "gt.ivecs") == rows);
  const std::string raw = testing::read_bytes(dir / "gt.ivecs");
  CHECK(raw.size() == 2 * (4 + 12));
}

TEST_CASE("brute force knn") {
  const auto ds = testing::gaussian(500, 6, 10);

  SUBCASE("member query comes first at distance zero") {
    const auto r = brute_force_knn(ds, ds.row(42), 5);
    CHECK(r[0].id == 42);
    CHECK(r[0].distance == 0.0f);
  }
  SUBCASE("k = count returns everything in order") {
    const auto r = brute_force_knn(ds, ds.row(0), ds.count());
    CHECK(r.size() == ds.count());
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1] < r[i]);
  }
  SUBCASE("matches the double-precision full sort") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
      const auto q = testing::random_vector(6, rng);
      const auto r = brute_force_knn(ds, q, 10);
      for (std::size_t j = 1; j < r.size(); ++j) CHECK(r[j - 1].distance <= r[j].distance);
      std::vector<NodeId> ids;
      for (const auto& n : r) ids.push_back(n.id);
      CHECK(oracle::overlap(ids, oracle::knn_ids(ds, q, 10)) == 1.0);
    }
  }
  SUBCASE("ties go to the lower id") {
    const VectorDataset dup(1, {1, 0, 1, 1});
    const std::vector<float> q{1};
    const auto r = brute_force_knn(dup, q, 3);
    CHECK(r[0].id == 0);
    CHECK(r[1].id == 2);
    CHECK(r[2].id == 3);
  }
  SUBCASE("invariant under row permutation") {
    std::vector<NodeId> perm(ds.count());
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(8));
    const auto shuffled = ds.subset(perm);
    std::mt19937_64 rng(6);
    const auto q = testing::random_vector(6, rng);
    const auto a = brute_force_knn(ds, q, 10);
    const auto b = brute_force_knn(shuffled, q, 10);
    for (std::size_t j = 0; j < 10; ++j) CHECK(perm[b[j].id] == a[j].id);
  }
  CHECK_THROWS_AS(brute_force_knn(ds, ds.row(0), 0), std::invalid_argument);
  CHECK_THROWS_AS(brute_force_knn(ds, ds.row(0), ds.count() + 1), std::invalid_argument);
}

TEST_CASE("recall at k") {
  std::vector<NodeId> a(10), b(10), c(10);
  std::iota(a.begin(), a.end(), 0u);
  std::iota(b.begin(), b.end(), 100u);
  std::iota(c.begin(), c.end(), 5u);
  CHECK(recall_at_k(std::span<const NodeId>(a), a, 10) == 1.0);
  CHECK(recall_at_k(std::span<const NodeId>(a), b, 10) == 0.0);
  CHECK(recall_at_k(std::span<const NodeId>(a), c, 10) == 0.5);
  CHECK(recall_at_k(std::span<const NodeId>(c), a, 10) == recall_at_k(std::span<const NodeId>(a), c, 10));
  const std::vector<NodeId> short_list{1, 2};
  CHECK_THROWS_AS(recall_at_k(std::span<const NodeId>(short_list), a, 10), std::invalid_argument);
  CHECK_THROWS_AS(recall_at_k(std::span<const NodeId>(a), short_list, 10), std::invalid_argument);
}
