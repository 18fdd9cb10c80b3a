#pragma once

// Replicate-parallel execution. Every Monte-Carlo loop in the project runs
// through these helpers: an OpenMP kernel for production use and a serial
// reference loop kept for testing and benchmarking. Because replicates draw
// from counter-based streams and write to disjoint slots, the two paths
// produce bit-identical per-replicate results.

#include <cstdint>
#include <utility>

#include <omp.h>

namespace kgof {

/// Serial reference loop: body(rep) for rep in [0, reps).
template <typename Body>
void replicate_for_serial(std::uint64_t reps, Body&& body) {
  for (std::uint64_t rep = 0; rep < reps; ++rep) body(rep);
}

/// OpenMP kernel: body(rep) across threads; body must only touch
/// replicate-local state and its own output slot.
template <typename Body>
void replicate_for_parallel(std::uint64_t reps, Body&& body) {
  const std::int64_t n = static_cast<std::int64_t>(reps);
#pragma omp parallel for schedule(static)
  for (std::int64_t rep = 0; rep < n; ++rep) {
    body(static_cast<std::uint64_t>(rep));
  }
}

/// Dispatch: threads == 1 selects the serial reference, 0 means use all
/// available threads.
template <typename Body>
void replicate_for(std::uint64_t reps, Body&& body, int threads = 0) {
  if (threads == 1) {
    replicate_for_serial(reps, std::forward<Body>(body));
    return;
  }
  if (threads > 1) omp_set_num_threads(threads);
  replicate_for_parallel(reps, std::forward<Body>(body));
}

/// Reduction over replicates with a mergeable accumulator. make() builds a
/// thread-local accumulator, body(rep, acc) adds one replicate, merge folds
/// thread-locals into the result (associative and commutative by contract).
template <typename Acc, typename Make, typename Body, typename Merge>
Acc replicate_reduce(std::uint64_t reps, Make&& make, Body&& body,
                     Merge&& merge, int threads = 0) {
  Acc total = make();
  if (threads == 1) {
    for (std::uint64_t rep = 0; rep < reps; ++rep) body(rep, total);
    return total;
  }
  if (threads > 1) omp_set_num_threads(threads);
  const std::int64_t n = static_cast<std::int64_t>(reps);
#pragma omp parallel
  {
    Acc local = make();
#pragma omp for schedule(static) nowait
    for (std::int64_t rep = 0; rep < n; ++rep) {
      body(static_cast<std::uint64_t>(rep), local);
    }
#pragma omp critical(kgof_replicate_reduce)
    merge(total, local);
  }
  return total;
}

}  // namespace kgof
