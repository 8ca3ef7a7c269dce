#include <gtest/gtest.h>

#include <cmath>

#include "recal/random.hpp"

using namespace recal;

// Reference blocks from an independent Philox4x64-10 implementation (numpy's
// bit generator; its counter is pre-incremented, so these are the blocks at
// the listed counters).
TEST(Philox, KnownAnswerZeroKeyZeroCounter) {
  auto b = Philox4x64::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(b[0], 0x16554d9eca36314cULL);
  EXPECT_EQ(b[1], 0xdb20fe9d672d0fdcULL);
  EXPECT_EQ(b[2], 0xd7e772cee186176bULL);
  EXPECT_EQ(b[3], 0x7e68b68aec7ba23bULL);
}

TEST(Philox, KnownAnswerNonzeroKey) {
  auto b = Philox4x64::block({7, 0, 0, 0}, {0x0123456789abcdefULL, 0xfedcba9876543210ULL});
  EXPECT_EQ(b[0], 0x1d3f9b580a7a91e2ULL);
  EXPECT_EQ(b[1], 0x80b9e338b9d2a202ULL);
  EXPECT_EQ(b[2], 0x113bc5c237869222ULL);
  EXPECT_EQ(b[3], 0x8494d117fc180028ULL);
}

TEST(Philox, KnownAnswerSecondCounterWord) {
  auto b = Philox4x64::block({0, 6, 0, 0}, {42, 7});
  EXPECT_EQ(b[0], 0x21004fb909811bb5ULL);
  EXPECT_EQ(b[1], 0xd81106b10e2a6b8aULL);
  EXPECT_EQ(b[2], 0x2d2b618891b3d44aULL);
  EXPECT_EQ(b[3], 0x1e49c38183ce79e9ULL);
}

TEST(Stream, DeterministicAndIndependentSubstreams) {
  Stream a(1, 2, 3), b(1, 2, 3), c(1, 2, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    differs = differs || x != c.normal();
  }
  EXPECT_TRUE(differs);
}

TEST(Stream, MomentsOfNormalAndUniform) {
  Stream s(9, 9, 0);
  const int n = 200000;
  double m = 0, m2 = 0, u = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    m += x;
    m2 += x * x;
    u += s.uniform();
  }
  m /= n;
  m2 /= n;
  u /= n;
  EXPECT_NEAR(m, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(u, 0.5, 4.0 * std::sqrt(1.0 / 12 / n));
}

TEST(Fnv1a, KnownValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}
