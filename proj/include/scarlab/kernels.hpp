#pragma once

#include <functional>

#include "scarlab/common.hpp"

namespace scarlab::kernels {

// Runs fn(i) for i in [0, count). Work items must be independent: the parallel
// path distributes them over OpenMP threads, the serial path (selected by the
// global exec policy) is the reference implementation used in tests and as a
// benchmark baseline. Results are bitwise identical between the two because
// no reduction happens inside the loop.
void for_each_index(i64 count, const std::function<void(i64)>& fn);

// Deterministic reductions: values are materialized per index (in parallel
// when the policy allows), then summed serially in index order.
double sum_indexed(i64 count, const std::function<double(i64)>& fn);
cplx sum_indexed_cplx(i64 count, const std::function<cplx(i64)>& fn);

}  // namespace scarlab::kernels
