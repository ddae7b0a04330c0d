#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace bayinv {

/// Execution policy for the data-parallel kernels. Every parallel loop writes
/// to a per-index slot, so both policies produce bit-identical results.
enum class Exec
{
  serial,
  parallel
};

/// Runs body(i) for i in [0, n). Exceptions thrown inside the parallel region
/// are captured and the one with the lowest index is rethrown.
template <class Body>
void for_each_index(Exec exec, std::size_t n, Body&& body)
{
  if (exec == Exec::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }

  std::exception_ptr first_error;
  std::size_t first_index = n;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long k = 0; k < count; ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (i < first_index) {
        first_index = i;
        first_error = std::current_exception();
      }
    }
  }
  if (first_error)
    std::rethrow_exception(first_error);
}

/// Number of worker threads the parallel policy will use.
int worker_threads();

} // namespace bayinv
