#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "mmfmd/rng.hpp"

using namespace mmfmd;

// Known-answer vectors published with the Random123 reference implementation.
TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                      {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                      {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same address, same sequence") {
  CounterRng a(42, Stream::prmc_weights, 7);
  CounterRng b(42, Stream::prmc_weights, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seed, stream or index give different sequences") {
  auto first = [](std::uint64_t seed, Stream s, std::uint64_t idx) {
    CounterRng r(seed, s, idx);
    return r.next_u64();
  };
  std::set<std::uint64_t> seen{first(1, Stream::prmc_weights, 0), first(2, Stream::prmc_weights, 0),
                               first(1, Stream::camera_noise, 0), first(1, Stream::prmc_weights, 1),
                               first(1ull << 40, Stream::prmc_weights, 0),
                               first(1, Stream::prmc_weights, 1ull << 40)};
  CHECK(seen.size() == 6);
}

TEST_CASE("uniform draws lie in [0, 1) with the right moments") {
  CounterRng r(3, Stream::trial_weights, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - 0.5) < 0.005);
  CHECK(std::abs(sq / n - mean * mean - 1.0 / 12.0) < 0.002);
}

TEST_CASE("normal draws have zero mean and unit variance") {
  CounterRng r(5, Stream::camera_noise, 9);
  const int n = 200000;
  double sum = 0.0, sq = 0.0, fourth = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
    fourth += z * z * z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  CHECK(std::abs(fourth / n - 3.0) < 0.1);
}

TEST_CASE("uniform_index stays in range and covers it evenly") {
  CounterRng r(11, Stream::split_permutation, 0);
  std::vector<int> hist(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = r.uniform_index(7);
    REQUIRE(k < 7);
    ++hist[k];
  }
  for (int h : hist) CHECK(std::abs(h - n / 7) < 400);
  CHECK(r.uniform_index(1) == 0);
}
