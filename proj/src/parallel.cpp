#include "hyperrate/parallel.hpp"

#include <cstdlib>

#include <omp.h>

namespace hyperrate {

int thread_count() {
  if (const char* env = std::getenv("HYPERRATE_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

int threads_for(ExecutionPolicy policy) {
  return policy == ExecutionPolicy::serial ? 1 : thread_count();
}

}  // namespace hyperrate
