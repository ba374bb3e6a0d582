#include <doctest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

#include "mmfmd/parallel.hpp"

using namespace mmfmd;

TEST_CASE("every index runs exactly once for any thread count") {
  for (unsigned t : {1u, 2u, 3u, 8u}) {
    set_thread_count(t);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(0, hits.size(), [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  set_thread_count(0);
}

TEST_CASE("empty and reversed ranges do nothing") {
  int calls = 0;
  parallel_for(5, 5, [&](std::size_t) { ++calls; });
  parallel_for(7, 3, [&](std::size_t) { ++calls; });
  CHECK(calls == 0);
}

TEST_CASE("the first exception reaches the caller") {
  set_thread_count(4);
  CHECK_THROWS_AS(parallel_for(0, 100,
                               [](std::size_t i) {
                                 if (i == 37) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  set_thread_count(0);
}

TEST_CASE("nested loops complete") {
  set_thread_count(4);
  std::vector<std::vector<int>> grid(20, std::vector<int>(20, 0));
  parallel_for(0, 20, [&](std::size_t i) {
    parallel_for(0, 20, [&](std::size_t j) { grid[i][j] = static_cast<int>(i * 20 + j); });
  });
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) CHECK(grid[i][j] == static_cast<int>(i * 20 + j));
  set_thread_count(0);
}

TEST_CASE("thread count setting") {
  set_thread_count(3);
  CHECK(thread_count() == 3);
  set_thread_count(0);
  CHECK(thread_count() >= 1);
}
