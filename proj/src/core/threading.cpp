#include "earshot/core/threading.hpp"

#include <algorithm>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace earshot {

namespace {
int g_workers = 0;
}

void set_num_workers(int n) {
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  g_workers = std::max(1, n);
#ifdef _OPENMP
  omp_set_num_threads(g_workers);
#endif
}

int num_workers() {
  if (g_workers == 0) set_num_workers(0);
  return g_workers;
}

int worker_index() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

}  // namespace earshot
