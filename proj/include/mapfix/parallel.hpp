#pragma once
// Execution-mode switch for the hot loops.
//
// Every parallel kernel in the project is written as an index loop whose
// iterations touch disjoint outputs and whose per-element arithmetic has a
// fixed serial order. That makes Serial and Parallel bit-identical; the unit
// tests assert it and tools/bench compares their throughput.

#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mapfix {

enum class Exec { Serial, Parallel };

template <typename Fn>
void parallel_for(std::size_t n, Exec mode, Fn&& fn) {
    if (mode == Exec::Parallel) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
#endif
    }
    for (std::size_t i = 0; i < n; ++i) {
        fn(i);
    }
}

inline int hardware_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace mapfix
