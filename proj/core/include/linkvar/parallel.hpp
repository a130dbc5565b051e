#pragma once

#include <cstddef>
#include <functional>

namespace linkvar {

/// Worker count used by multistart loops. 0 means hardware concurrency.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [0, n). Tasks must write only to their own slot;
/// results are therefore independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace linkvar
