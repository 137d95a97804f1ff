#include "rkmpc/kernels.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rkmpc::kernels {

namespace {
std::atomic<bool> g_parallel{true};
constexpr int kBlocks = 256;
}  // namespace

bool parallel_enabled() { return g_parallel.load(); }
void set_parallel(bool enabled) { g_parallel.store(enabled); }

std::vector<std::pair<int, int>> partition(int n) {
  std::vector<std::pair<int, int>> blocks;
  if (n <= 0) return blocks;
  const int nb = std::min(kBlocks, n);
  const int base = n / nb, rem = n % nb;
  int begin = 0;
  for (int b = 0; b < nb; ++b) {
    const int len = base + (b < rem ? 1 : 0);
    blocks.emplace_back(begin, begin + len);
    begin += len;
  }
  return blocks;
}

namespace {

GramResult gram_block(const Mat& Z, const Mat& Y, int b, int e) {
  GramResult r;
  const auto Zb = Z.middleCols(b, e - b);
  r.gram.noalias() = Zb * Zb.transpose();
  r.cross.noalias() = Zb * Y.middleCols(b, e - b).transpose();
  return r;
}

GramResult gram_block_weighted(const Mat& Z, const Mat& Y, const Vec& w, int b, int e) {
  GramResult r;
  const Mat Zw = Z.middleCols(b, e - b) * w.segment(b, e - b).asDiagonal();
  r.gram.noalias() = Zw * Z.middleCols(b, e - b).transpose();
  r.cross.noalias() = Zw * Y.middleCols(b, e - b).transpose();
  return r;
}

GramResult combine(std::vector<GramResult>& parts, int p, int q) {
  GramResult total;
  total.gram = Mat::Zero(p, p);
  total.cross = Mat::Zero(p, q);
  for (auto& part : parts) {
    total.gram += part.gram;
    total.cross += part.cross;
  }
  return total;
}

double nn_gap_block(const Mat& pts, int b, int e) {
  // max over i in [b,e) of min_{j != i} ||p_i - p_j||
  const int M = static_cast<int>(pts.cols());
  double worst = 0.0;
  for (int i = b; i < e; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < M; ++j) {
      if (j == i) continue;
      best = std::min(best, (pts.col(i) - pts.col(j)).squaredNorm());
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

}  // namespace

namespace serial {

GramResult gram_accumulate(const Mat& Z, const Mat& Y) {
  auto blocks = partition(static_cast<int>(Z.cols()));
  std::vector<GramResult> parts(blocks.size());
  for (size_t b = 0; b < blocks.size(); ++b)
    parts[b] = gram_block(Z, Y, blocks[b].first, blocks[b].second);
  return combine(parts, static_cast<int>(Z.rows()), static_cast<int>(Y.rows()));
}

GramResult gram_accumulate_weighted(const Mat& Z, const Mat& Y, const Vec& w) {
  auto blocks = partition(static_cast<int>(Z.cols()));
  std::vector<GramResult> parts(blocks.size());
  for (size_t b = 0; b < blocks.size(); ++b)
    parts[b] = gram_block_weighted(Z, Y, w, blocks[b].first, blocks[b].second);
  return combine(parts, static_cast<int>(Z.rows()), static_cast<int>(Y.rows()));
}

double max_nn_gap(const Mat& pts) {
  if (pts.cols() < 2) return 0.0;
  auto blocks = partition(static_cast<int>(pts.cols()));
  double worst = 0.0;
  for (auto [b, e] : blocks) worst = std::max(worst, nn_gap_block(pts, b, e));
  return worst;
}

Vec support_batch(const Vec& center, const Mat& generators, const Mat& dirs) {
  Vec h(dirs.cols());
  for (int j = 0; j < dirs.cols(); ++j)
    h(j) = dirs.col(j).dot(center) +
           (generators.transpose() * dirs.col(j)).cwiseAbs().sum();
  return h;
}

void for_each_index(int n, const std::function<void(int)>& fn) {
  for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace serial

namespace omp {

GramResult gram_accumulate(const Mat& Z, const Mat& Y) {
  auto blocks = partition(static_cast<int>(Z.cols()));
  std::vector<GramResult> parts(blocks.size());
#pragma omp parallel for schedule(static)
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b)
    parts[b] = gram_block(Z, Y, blocks[b].first, blocks[b].second);
  return combine(parts, static_cast<int>(Z.rows()), static_cast<int>(Y.rows()));
}

GramResult gram_accumulate_weighted(const Mat& Z, const Mat& Y, const Vec& w) {
  auto blocks = partition(static_cast<int>(Z.cols()));
  std::vector<GramResult> parts(blocks.size());
#pragma omp parallel for schedule(static)
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b)
    parts[b] = gram_block_weighted(Z, Y, w, blocks[b].first, blocks[b].second);
  return combine(parts, static_cast<int>(Z.rows()), static_cast<int>(Y.rows()));
}

double max_nn_gap(const Mat& pts) {
  if (pts.cols() < 2) return 0.0;
  auto blocks = partition(static_cast<int>(pts.cols()));
  std::vector<double> worst(blocks.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b)
    worst[b] = nn_gap_block(pts, blocks[b].first, blocks[b].second);
  double out = 0.0;
  for (double v : worst) out = std::max(out, v);
  return out;
}

Vec support_batch(const Vec& center, const Mat& generators, const Mat& dirs) {
  Vec h(dirs.cols());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < static_cast<int>(dirs.cols()); ++j)
    h(j) = dirs.col(j).dot(center) +
           (generators.transpose() * dirs.col(j)).cwiseAbs().sum();
  return h;
}

void for_each_index(int n, const std::function<void(int)>& fn) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace omp

GramResult gram_accumulate(const Mat& Z, const Mat& Y) {
  return parallel_enabled() ? omp::gram_accumulate(Z, Y) : serial::gram_accumulate(Z, Y);
}
GramResult gram_accumulate_weighted(const Mat& Z, const Mat& Y, const Vec& w) {
  return parallel_enabled() ? omp::gram_accumulate_weighted(Z, Y, w)
                            : serial::gram_accumulate_weighted(Z, Y, w);
}
double max_nn_gap(const Mat& pts) {
  return parallel_enabled() ? omp::max_nn_gap(pts) : serial::max_nn_gap(pts);
}
Vec support_batch(const Vec& center, const Mat& generators, const Mat& dirs) {
  return parallel_enabled() ? omp::support_batch(center, generators, dirs)
                            : serial::support_batch(center, generators, dirs);
}
void for_each_index(int n, const std::function<void(int)>& fn) {
  return parallel_enabled() ? omp::for_each_index(n, fn) : serial::for_each_index(n, fn);
}

}  // namespace rkmpc::kernels
