#include "forestalign/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace forestalign::parallel {

int configure_threads_from_env() {
  if (const char* env = std::getenv("FORESTALIGN_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) omp_set_num_threads(n);
    } catch (const std::exception&) {
      // Unparseable values fall back to the OpenMP default.
    }
  }
  return omp_get_max_threads();
}

void set_max_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace forestalign::parallel
