#pragma once

#include <cstddef>
#include <functional>

namespace mmfmd {

// Worker count used by parallel_for. 0 selects hardware concurrency.
// Results never depend on this value: every parallel loop writes to
// index-addressed slots and reductions run sequentially afterwards.
void set_thread_count(unsigned count);
unsigned thread_count();

// Calls body(i) for i in [begin, end) using up to thread_count() threads.
// The first exception thrown by any body is rethrown on the caller.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace mmfmd
