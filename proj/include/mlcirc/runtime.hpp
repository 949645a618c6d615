#pragma once

namespace mlcirc {

// Global cap on the number of OpenMP threads used by parallel kernels.
// 0 means "whatever the OpenMP runtime defaults to". All kernels must
// produce bit-identical results for every cap value.
void set_max_threads(int n);
int max_threads();

// Effective thread count for a parallel region.
int thread_count();

} // namespace mlcirc
