#include "scarlab/kernels.hpp"

#include <cstdlib>
#include <vector>

#ifdef SCARLAB_HAVE_OPENMP
#include <omp.h>
#endif

namespace scarlab {

namespace {
Exec g_policy = Exec::parallel;
}

Exec exec_policy() { return g_policy; }

void set_exec_policy(Exec e) { g_policy = e; }

int worker_count() {
#ifdef SCARLAB_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void init_threads_from_env() {
  const char* s = std::getenv("SCARLAB_THREADS");
  if (!s) return;
  const int k = std::atoi(s);
  if (k > 0) {
#ifdef SCARLAB_HAVE_OPENMP
    omp_set_num_threads(k);
#endif
  }
}

namespace kernels {

void for_each_index(i64 count, const std::function<void(i64)>& fn) {
#ifdef SCARLAB_HAVE_OPENMP
  if (g_policy == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < count; ++i) fn(i);
    return;
  }
#endif
  for (i64 i = 0; i < count; ++i) fn(i);
}

double sum_indexed(i64 count, const std::function<double(i64)>& fn) {
  std::vector<double> vals(static_cast<size_t>(count));
  for_each_index(count, [&](i64 i) { vals[static_cast<size_t>(i)] = fn(i); });
  double s = 0.0;
  for (double v : vals) s += v;
  return s;
}

cplx sum_indexed_cplx(i64 count, const std::function<cplx(i64)>& fn) {
  std::vector<cplx> vals(static_cast<size_t>(count));
  for_each_index(count, [&](i64 i) { vals[static_cast<size_t>(i)] = fn(i); });
  cplx s(0.0, 0.0);
  for (const cplx& v : vals) s += v;
  return s;
}

}  // namespace kernels
}  // namespace scarlab
