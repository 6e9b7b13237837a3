// Times the serial reference kernels against the OpenMP path on three hot
// shapes: observable application to a batch of states, dense observable
// assembly, and an indexed reduction. Prints a table; no pass/fail. The two
// policies must agree bitwise, which is asserted per shape.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "scarlab/hilbert.hpp"
#include "scarlab/kernels.hpp"
#include "scarlab/trigpoly.hpp"

using namespace scarlab;

namespace {

double now_ms() {
  using clk = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clk::now().time_since_epoch()).count();
}

TrigPolynomial wave_mix(int two_d) {
  TrigPolynomial f(two_d);
  for (int i = 0; i < two_d; ++i) {
    IntRowVec n = IntRowVec::Zero(two_d);
    n(i) = 1;
    f.add_term(n, cplx(0.5, 0.0));
    f.add_term(-n, cplx(0.5, 0.0));
  }
  return f;
}

struct Timing {
  double serial_ms = 0;
  double parallel_ms = 0;
  bool identical = false;
};

template <typename Fn>
Timing race(const Fn& fn) {
  Timing t;
  set_exec_policy(Exec::serial);
  const double s0 = now_ms();
  const auto a = fn();
  t.serial_ms = now_ms() - s0;
  set_exec_policy(Exec::parallel);
  const double p0 = now_ms();
  const auto b = fn();
  t.parallel_ms = now_ms() - p0;
  t.identical = a == b;
  return t;
}

void report(const char* name, const Timing& t) {
  std::printf("%-24s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   bitwise %s\n",
              name, t.serial_ms, t.parallel_ms,
              t.parallel_ms > 0 ? t.serial_ms / t.parallel_ms : 0.0,
              t.identical ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  init_threads_from_env();
  const i64 big_n = argc > 1 ? std::atoll(argv[1]) : 48;
  std::printf("workers %d, N %lld (d = 2)\n", worker_count(), static_cast<long long>(big_n));

  const HilbertSpace s = make_space(big_n, 2);
  const TrigPolynomial f = wave_mix(4);

  std::vector<StateVec> batch;
  for (int k = 0; k < 8; ++k) {
    StateVec v = StateVec::Zero(s.dim);
    for (i64 i = 0; i < s.dim; ++i)
      v(i) = cplx(std::cos(0.1 * double(i + k)), std::sin(0.07 * double(i) + k));
    batch.push_back(v);
  }

  report("apply_observable x8", race([&] {
           cplx acc(0, 0);
           for (const StateVec& v : batch) acc += apply_observable(s, f, v).sum();
           return acc;
         }));

  report("dense assembly", race([&] {
           const DenseOperator op = quantize_observable(s, f);
           return cplx(op.matrix.sum());
         }));

  report("indexed reduction", race([&] {
           return kernels::sum_indexed(s.dim * 64, [&](i64 i) {
             const double x = double(i % 9973) / 9973.0;
             return x * x - 0.3 * x;
           });
         }));

  set_exec_policy(Exec::parallel);
  return 0;
}
