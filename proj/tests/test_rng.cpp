#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include <catch_amalgamated.hpp>

#include "dcoord/rng.hpp"

using dcoord::mix_seeds;
using dcoord::Rng;
using dcoord::splitmix64;

TEST_CASE("splitmix64 matches the published sequence") {
  std::uint64_t s = 0;
  CHECK(splitmix64(s) == 0xe220a8397b1dcdafull);
  CHECK(splitmix64(s) == 0x6e789e6aa1b965f4ull);
  CHECK(splitmix64(s) == 0x06c45d188009454full);
  CHECK(splitmix64(s) == 0xf88bb8a8724c81ecull);

  std::uint64_t t = 1234567;
  CHECK(splitmix64(t) == 0x599ed017fb08fc85ull);
  CHECK(splitmix64(t) == 0x2c73f08458540fa5ull);
  CHECK(splitmix64(t) == 0x883ebce5a3f27c77ull);
}

TEST_CASE("xoshiro256** matches an independent reference") {
  Rng rng(42);
  CHECK(rng.next_u64() == 0x15780b2e0c2ec716ull);
  CHECK(rng.next_u64() == 0x6104d9866d113a7eull);
  CHECK(rng.next_u64() == 0xae17533239e499a1ull);
  CHECK(rng.next_u64() == 0xecb8ad4703b360a1ull);
  CHECK(rng.next_u64() == 0xfde6dc7fe2ec5e64ull);

  Rng zero(0);
  CHECK(zero.next_u64() == 0x99ec5f36cb75f2b4ull);
  CHECK(zero.next_u64() == 0xbf6e1f784956452aull);
  CHECK(zero.next_u64() == 0x1a5f849d4933e6e0ull);
}

TEST_CASE("mix_seeds matches an independent reference") {
  CHECK(mix_seeds(0, 0) == 0xa706dd2f4d197e6full);
  CHECK(mix_seeds(0, 1) == 0x08b4fda8c892b50eull);
  CHECK(mix_seeds(1, 0) == 0x5e41ab087439611eull);
  CHECK(mix_seeds(7, 3) == 0x6baa78681a99f995ull);
  CHECK(mix_seeds(1234567, 42) == 0x30c3aa18892e3e34ull);
}

TEST_CASE("below stays in range and covers small supports") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) CHECK(rng.below(1) == 0);

  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto v = rng.below(5);
    REQUIRE(v < 5);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (const int c : counts) CHECK(c > 800);  // ~1000 expected each
}

TEST_CASE("range is inclusive on both ends") {
  Rng rng(11);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.range(3, 6);
    REQUIRE(v >= 3);
    REQUIRE(v <= 6);
    saw_lo |= v == 3;
    saw_hi |= v == 6;
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
  CHECK(rng.range(9, 9) == 9);
}

TEST_CASE("unit is in [0, 1) and bernoulli respects the extremes") {
  Rng rng(13);
  for (int i = 0; i < 5000; ++i) {
    const double u = rng.unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  for (int i = 0; i < 100; ++i) CHECK_FALSE(rng.bernoulli(0.0));
  for (int i = 0; i < 100; ++i) CHECK(rng.bernoulli(1.0));
}

TEST_CASE("bernoulli frequency tracks p") {
  Rng rng(17);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) hits += rng.bernoulli(0.3) ? 1 : 0;
  CHECK(hits > 2700);
  CHECK(hits < 3300);
}

TEST_CASE("shuffle permutes and is seed-deterministic") {
  std::vector<int> items(20);
  std::iota(items.begin(), items.end(), 0);
  auto a = items;
  auto b = items;
  Rng r1(99), r2(99);
  r1.shuffle(a);
  r2.shuffle(b);
  CHECK(a == b);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == items);

  Rng r3(100);
  auto c = items;
  r3.shuffle(c);
  CHECK(c != a);  // different seed, overwhelmingly different order
}

TEST_CASE("sample_indices draws k distinct indices") {
  Rng rng(5);
  std::vector<std::uint32_t> out;
  for (int trial = 0; trial < 200; ++trial) {
    rng.sample_indices(10, 4, out);
    REQUIRE(out.size() == 4);
    std::set<std::uint32_t> uniq(out.begin(), out.end());
    CHECK(uniq.size() == 4);
    for (const auto v : out) CHECK(v < 10);
  }
}

TEST_CASE("sample_indices with k >= m returns all indices and draws nothing") {
  Rng a(21), b(21);
  std::vector<std::uint32_t> out;
  a.sample_indices(6, 6, out);
  CHECK(out == std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5});
  a.sample_indices(6, 10, out);
  CHECK(out == std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5});
  // `a` consumed no randomness: both streams still agree.
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("sample_indices covers all positions over many draws") {
  Rng rng(31);
  std::vector<std::uint32_t> out;
  std::vector<int> seen(8, 0);
  for (int trial = 0; trial < 2000; ++trial) {
    rng.sample_indices(8, 2, out);
    for (const auto v : out) ++seen[v];
  }
  for (const int c : seen) CHECK(c > 300);  // 500 expected each
}

TEST_CASE("distinct seeds give distinct streams") {
  Rng a(1), b(2);
  bool differs = false;
  for (int i = 0; i < 4; ++i) differs |= a.next_u64() != b.next_u64();
  CHECK(differs);
  CHECK(mix_seeds(0, 1) != mix_seeds(1, 0));
  CHECK(mix_seeds(3, 4) != mix_seeds(3, 5));
}
