#pragma once

#include <cstddef>

namespace fractv {

/// Planes below this many samples are swept on the calling thread.
inline constexpr std::size_t kParallelThreshold = 128 * 128;

inline bool parallel_worthwhile(std::size_t samples) { return samples >= kParallelThreshold; }

/// Thread cap from RVL_THREADS (0 or unset = OpenMP default). Returns the count in effect.
int configure_threads();

/// Threads available to an outer parallel loop.
int max_threads();

}  // namespace fractv
