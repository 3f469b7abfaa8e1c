#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "rfsl/parallel.hpp"
#include "rfsl/rng.hpp"

using rfsl::rng::Domain;
using rfsl::rng::Stream;

TEST(Rng, StreamsAreReproducible) {
  Stream a(42, Domain::StepNoise, 3, 7), b(42, Domain::StepNoise, 3, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DistinctKeysGiveDistinctStreams) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed : {0ull, 1ull})
    for (auto d : {Domain::InitialState, Domain::StepNoise, Domain::TargetDraw})
      for (std::uint64_t a = 0; a < 10; ++a)
        for (std::uint64_t b = 0; b < 10; ++b) firsts.insert(Stream(seed, d, a, b).next_u64());
  EXPECT_EQ(firsts.size(), 2u * 3u * 10u * 10u);
}

TEST(Rng, UniformIsInOpenUnitInterval) {
  Stream s(5, Domain::Test, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Rng, NormalMomentsWithinMonteCarloBands) {
  Stream s(9, Domain::Test, 1);
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n, m2 /= n, m4 /= n;
  EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  Stream s(1, Domain::Test, 2);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = s.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 4.0 * std::sqrt(10000 * 6.0 / 7.0));
}

TEST(Parallel, EveryIndexVisitedOnceForAnyThreadCount) {
  for (std::size_t threads : {1u, 2u, 3u, 8u}) {
    std::vector<std::atomic<int>> hits(1001);
    rfsl::parallel_for(
        hits.size(), threads,
        [&](std::size_t b, std::size_t e) {
          for (std::size_t i = b; i < e; ++i) hits[i]++;
        },
        17);
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(Parallel, FirstExceptionByChunkOrderIsRethrown) {
  for (std::size_t threads : {1u, 4u}) {
    try {
      rfsl::parallel_for(
          100, threads,
          [](std::size_t b, std::size_t) {
            if (b >= 30) throw std::runtime_error("chunk " + std::to_string(b));
          },
          10);
      FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "chunk 30");
    }
  }
}

TEST(Parallel, EmptyRangeIsNoop) {
  bool called = false;
  rfsl::parallel_for(0, 4, [&](std::size_t, std::size_t) { called = true; });
  EXPECT_FALSE(called);
}
