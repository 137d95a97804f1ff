#include <doctest.h>

#include <random>

#include "rkmpc/simplex.hpp"

using namespace rkmpc;
using detail::LpStatus;

TEST_SUITE_BEGIN("simplex");

TEST_CASE("maximize over a box") {
  Mat A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  Vec b(4);
  b << 2, 1, 3, 0.5;  // x in [-1,2], y in [-0.5,3]
  Vec c(2);
  c << 1, 1;
  auto r = detail::lp_maximize(c, A, b);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.value == doctest::Approx(5.0));
  CHECK(r.x(0) == doctest::Approx(2.0));
  CHECK(r.x(1) == doctest::Approx(3.0));
}

TEST_CASE("negative offsets force a phase-1 start") {
  // x >= 1, x <= 3, maximize -x  => x = 1
  Mat A(2, 1);
  A << -1, 1;
  Vec b(2);
  b << -1, 3;
  Vec c(1);
  c << -1;
  auto r = detail::lp_maximize(c, A, b);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.value == doctest::Approx(-1.0));
}

TEST_CASE("infeasible and unbounded are detected") {
  Mat A(2, 1);
  A << 1, -1;
  Vec b(2);
  b << 1, -2;  // x <= 1 and x >= 2
  CHECK(detail::lp_maximize(Vec::Ones(1), A, b).status == LpStatus::infeasible);
  CHECK_FALSE(detail::lp_feasible(A, b));

  Mat A2(1, 2);
  A2 << 1, 0;
  Vec b2(1);
  b2 << 1;
  Vec c2(2);
  c2 << 0, 1;  // y unconstrained above
  CHECK(detail::lp_maximize(c2, A2, b2).status == LpStatus::unbounded);
}

TEST_CASE("random LPs against vertex enumeration in 2-D") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int solved = 0;
  for (int trial = 0; trial < 50; ++trial) {
    // random bounded polygon: box plus random cuts
    Mat A(4 + 4, 2);
    Vec b(8);
    A.topRows(4) << 1, 0, -1, 0, 0, 1, 0, -1;
    b.head(4).setConstant(2.0);
    for (int i = 4; i < 8; ++i) {
      A(i, 0) = u(gen);
      A(i, 1) = u(gen);
      if (A.row(i).norm() < 0.3) A(i, 0) += 0.5;
      b(i) = 0.5 + std::abs(u(gen));
    }
    Vec c(2);
    c << u(gen), u(gen);
    auto r = detail::lp_maximize(c, A, b);
    REQUIRE(r.status == LpStatus::optimal);
    ++solved;
    // oracle: intersect all row pairs, keep feasible points, take max c'x
    double best = -1e300;
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j) {
        Mat M(2, 2);
        M << A.row(i), A.row(j);
        if (std::abs(M.determinant()) < 1e-9) continue;
        Vec rhs(2);
        rhs << b(i), b(j);
        Vec x = M.partialPivLu().solve(rhs);
        if (((A * x - b).array() <= 1e-9).all()) best = std::max(best, c.dot(x));
      }
    CHECK(r.value == doctest::Approx(best).epsilon(1e-7));
  }
  CHECK(solved == 50);
}

TEST_CASE("covering LP: hand-solvable single constraint") {
  Mat dens(1, 3);
  dens << 1.0, 0.0, 0.0;
  Vec gaps(1);
  gaps << 2.0;
  Vec costs(3);
  costs << 1e-6, 1.0, 1.0;
  bool ok = false;
  Vec L = detail::covering_lp(dens, gaps, costs, &ok);
  CHECK(ok);
  CHECK(L(0) == doctest::Approx(2.0));
  CHECK(L(1) == doctest::Approx(0.0));
  CHECK(L(2) == doctest::Approx(0.0));
}

TEST_CASE("covering LP certifies every row") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat dens(200, 3);
  Vec gaps(200);
  for (int p = 0; p < 200; ++p) {
    for (int k = 0; k < 3; ++k) dens(p, k) = u(gen);
    gaps(p) = u(gen);
  }
  Vec costs(3);
  costs << 1.0, 2.0, 0.5;
  Vec L = detail::covering_lp(dens, gaps, costs);
  const Vec slack = dens * L - gaps;
  CHECK(slack.minCoeff() >= -1e-8);
}

TEST_SUITE_END();
