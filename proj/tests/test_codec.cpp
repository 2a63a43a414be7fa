#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "support.hpp"
#include "tractconn/label_codec.hpp"

using namespace tractconn;
using testing_support::expect_error;

TEST(Codec, ClassCounts) {
  EXPECT_EQ(num_classes(84), 3571u);
  EXPECT_EQ(num_classes(1), 2u);
  EXPECT_EQ(num_classes(164), 13531u);
}

TEST(Codec, UnknownClass) {
  EXPECT_EQ(encode({0, 17}, 84), 0u);
  EXPECT_EQ(encode({17, 0}, 84), 0u);
  EXPECT_EQ(encode({0, 0}, 84), 0u);
  EXPECT_EQ(decode(0, 84), (NodePair{0, 0}));
}

TEST(Codec, KnownRanks) {
  EXPECT_EQ(encode({1, 1}, 84), 1u);
  EXPECT_EQ(encode({84, 84}, 84), 3570u);
  EXPECT_EQ(decode(3570, 84), (NodePair{84, 84}));
  // Rank of (7, 76) among lexicographically ordered canonical pairs of 1..84.
  const auto pairs = oracle::enumerate_pairs(84);
  const auto it = std::find(pairs.begin(), pairs.end(), std::pair<std::uint32_t, std::uint32_t>{7, 76});
  const auto rank = static_cast<ClassId>(it - pairs.begin()) + 1;
  EXPECT_EQ(rank, 559u);
  EXPECT_EQ(encode({7, 76}, 84), 559u);
  EXPECT_EQ(encode({76, 7}, 84), 559u);
}

TEST(Codec, MatchesEnumerationOracle) {
  for (std::uint32_t n : {1u, 2u, 3u, 5u, 10u, 84u, 164u}) {
    const auto pairs = oracle::enumerate_pairs(n);
    ASSERT_EQ(pairs.size() + 1, num_classes(n));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const NodePair p{pairs[i].first, pairs[i].second};
      ASSERT_EQ(encode(p, n), i + 1) << n << ": " << p.a << "," << p.b;
      ASSERT_EQ(decode(static_cast<ClassId>(i + 1), n), p);
    }
  }
}

TEST(Codec, SymmetricAndMonotone) {
  const std::uint32_t n = 30;
  ClassId previous = 0;
  for (std::uint32_t a = 1; a <= n; ++a)
    for (std::uint32_t b = a; b <= n; ++b) {
      EXPECT_EQ(encode({a, b}, n), encode({b, a}, n));
      EXPECT_GT(encode({a, b}, n), previous);
      previous = encode({a, b}, n);
    }
}

TEST(Codec, RangeErrors) {
  expect_error(Errc::NodeOutOfRange, [] { encode({85, 3}, 84); });
  expect_error(Errc::ClassOutOfRange, [] { decode(3571, 84); });
}

TEST(Codec, SchemeFile) {
  const auto s = parse_scheme("3\nleft\nright\nmiddle\n", "demo");
  EXPECT_EQ(s.n_regions, 3u);
  EXPECT_EQ(s.region_names.size(), 3u);
  EXPECT_EQ(format_scheme(s), "3\nleft\nright\nmiddle\n");
  EXPECT_EQ(parse_scheme("84\n").n_regions, 84u);
  expect_error(Errc::ConfigInvalid, [] { parse_scheme("3\na\nb\n"); });
  expect_error(Errc::ParseError, [] { parse_scheme("x\n"); });
  expect_error(Errc::ParseError, [] { parse_scheme(""); });
}
