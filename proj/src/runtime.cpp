#include "mlcirc/runtime.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mlcirc {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int max_threads() { return g_max_threads.load(); }

int thread_count() {
    int cap = g_max_threads.load();
    if (cap > 0) return cap;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace mlcirc
