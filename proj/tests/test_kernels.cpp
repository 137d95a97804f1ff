#include <doctest.h>

#include <random>

#include "rkmpc/kernels.hpp"

using namespace rkmpc;

namespace {
Mat random_mat(int r, int c, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = n(gen);
  return m;
}
}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("partition covers [0, n) contiguously") {
  for (int n : {0, 1, 5, 255, 256, 257, 100000}) {
    auto blocks = kernels::partition(n);
    int covered = 0;
    int prev_end = 0;
    for (auto [b, e] : blocks) {
      CHECK(b == prev_end);
      CHECK(e > b);
      covered += e - b;
      prev_end = e;
    }
    CHECK(covered == n);
  }
}

TEST_CASE("omp kernels are bitwise identical to the serial reference") {
  const Mat Z = random_mat(7, 10001, 21);
  const Mat Y = random_mat(4, 10001, 22);
  auto gs = kernels::serial::gram_accumulate(Z, Y);
  auto go = kernels::omp::gram_accumulate(Z, Y);
  CHECK((gs.gram - go.gram).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((gs.cross - go.cross).lpNorm<Eigen::Infinity>() == 0.0);

  Vec w = random_mat(10001, 1, 23).col(0).cwiseAbs();
  auto ws = kernels::serial::gram_accumulate_weighted(Z, Y, w);
  auto wo = kernels::omp::gram_accumulate_weighted(Z, Y, w);
  CHECK((ws.gram - wo.gram).lpNorm<Eigen::Infinity>() == 0.0);

  const Mat P = random_mat(3, 800, 24);
  CHECK(kernels::serial::max_nn_gap(P) == kernels::omp::max_nn_gap(P));

  const Mat G = random_mat(3, 40, 25);
  const Mat D = random_mat(3, 500, 26);
  const Vec c = random_mat(3, 1, 27).col(0);
  Vec hs = kernels::serial::support_batch(c, G, D);
  Vec ho = kernels::omp::support_batch(c, G, D);
  CHECK((hs - ho).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("gram matches the naive accumulation") {
  const Mat Z = random_mat(5, 300, 31);
  const Mat Y = random_mat(2, 300, 32);
  auto g = kernels::gram_accumulate(Z, Y);
  Mat gram = Mat::Zero(5, 5), cross = Mat::Zero(5, 2);
  for (int i = 0; i < 300; ++i) {
    gram += Z.col(i) * Z.col(i).transpose();
    cross += Z.col(i) * Y.col(i).transpose();
  }
  CHECK((g.gram - gram).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK((g.cross - cross).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("max_nn_gap against the quadratic scan") {
  const Mat P = random_mat(3, 1000, 41);
  double worst = 0.0;
  for (int i = 0; i < P.cols(); ++i) {
    double best = 1e300;
    for (int j = 0; j < P.cols(); ++j)
      if (i != j) best = std::min(best, (P.col(i) - P.col(j)).norm());
    worst = std::max(worst, best);
  }
  CHECK(kernels::max_nn_gap(P) == doctest::Approx(worst).epsilon(1e-12));
  CHECK(kernels::max_nn_gap(random_mat(3, 1, 42)) == 0.0);
}

TEST_CASE("for_each_index visits every slot once") {
  std::vector<int> hits(5000, 0);
  kernels::for_each_index(5000, [&](int i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
}

TEST_SUITE_END();
