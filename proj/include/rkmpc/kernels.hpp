#pragma once

#include <functional>
#include <vector>

#include "rkmpc/types.hpp"

namespace rkmpc::kernels {

/// Fixed block partition of [0, n). Block boundaries depend only on n, so
/// per-block partial results combined in block order are bitwise identical
/// for any thread count (including the serial reference).
std::vector<std::pair<int, int>> partition(int n);

struct GramResult {
  Mat gram;   // Z * Z^T
  Mat cross;  // Z * Y^T
};

namespace serial {
GramResult gram_accumulate(const Mat& Z, const Mat& Y);
GramResult gram_accumulate_weighted(const Mat& Z, const Mat& Y, const Vec& w);
double max_nn_gap(const Mat& pts);
Vec support_batch(const Vec& center, const Mat& generators, const Mat& dirs);
void for_each_index(int n, const std::function<void(int)>& fn);
}  // namespace serial

namespace omp {
GramResult gram_accumulate(const Mat& Z, const Mat& Y);
GramResult gram_accumulate_weighted(const Mat& Z, const Mat& Y, const Vec& w);
double max_nn_gap(const Mat& pts);
Vec support_batch(const Vec& center, const Mat& generators, const Mat& dirs);
void for_each_index(int n, const std::function<void(int)>& fn);
}  // namespace omp

/// Runtime switch between the OpenMP kernels and the serial reference.
bool parallel_enabled();
void set_parallel(bool enabled);

GramResult gram_accumulate(const Mat& Z, const Mat& Y);
GramResult gram_accumulate_weighted(const Mat& Z, const Mat& Y, const Vec& w);
double max_nn_gap(const Mat& pts);
Vec support_batch(const Vec& center, const Mat& generators, const Mat& dirs);
void for_each_index(int n, const std::function<void(int)>& fn);

}  // namespace rkmpc::kernels
