// Timing comparison of the OpenMP kernels against the serial reference.
#include <chrono>
#include <cstdio>
#include <random>

#include "rkmpc/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void row(const char* name, double serial_ms, double omp_ms) {
  std::printf("%-24s %10.3f ms %10.3f ms %8.2fx\n", name, serial_ms, omp_ms,
              serial_ms / omp_ms);
}

}  // namespace

int main() {
  using namespace rkmpc;
  std::mt19937_64 gen(7);
  std::normal_distribution<double> dist(0.0, 1.0);

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; omp kernels run serially\n");
#endif
  std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "omp", "speedup");

  {
    const int p = 8, q = 5, M = 200000;
    Mat Z(p, M), Y(q, M);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < M; ++j) Z(i, j) = dist(gen);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < M; ++j) Y(i, j) = dist(gen);
    row("gram_accumulate",
        time_ms([&] { kernels::serial::gram_accumulate(Z, Y); }, 5),
        time_ms([&] { kernels::omp::gram_accumulate(Z, Y); }, 5));
  }
  {
    const int d = 4, M = 4000;
    Mat P(d, M);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < M; ++j) P(i, j) = dist(gen);
    row("max_nn_gap",
        time_ms([&] { kernels::serial::max_nn_gap(P); }, 3),
        time_ms([&] { kernels::omp::max_nn_gap(P); }, 3));
  }
  {
    const int d = 5, g = 400, nd = 20000;
    Vec c = Vec::Zero(d);
    Mat G(d, g), D(d, nd);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < g; ++j) G(i, j) = dist(gen);
      for (int j = 0; j < nd; ++j) D(i, j) = dist(gen);
    }
    row("support_batch",
        time_ms([&] { kernels::serial::support_batch(c, G, D); }, 5),
        time_ms([&] { kernels::omp::support_batch(c, G, D); }, 5));
  }
  return 0;
}
