#pragma once

#include <cstddef>

namespace forestalign::parallel {

/// Applies FORESTALIGN_THREADS (0 or unset = OpenMP default) to the OpenMP
/// runtime. Returns the resulting thread cap.
int configure_threads_from_env();

void set_max_threads(int threads);
int max_threads();

/// Reductions are computed over fixed-size chunks and combined in chunk
/// order, so parallel sums are bitwise identical for any thread count.
inline constexpr std::size_t kReductionChunk = 4096;

inline std::size_t chunk_count(std::size_t n) {
  return (n + kReductionChunk - 1) / kReductionChunk;
}

}  // namespace forestalign::parallel
