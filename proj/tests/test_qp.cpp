#include <doctest.h>

#include <random>

#include "rkmpc/qp.hpp"

using namespace rkmpc;
using namespace rkmpc::qp;

namespace {

// exhaustive active-set oracle: enumerate constraint subsets, solve the
// equality-constrained KKT system, keep feasible candidates with nonnegative
// multipliers, return the best objective
struct OracleResult {
  bool found = false;
  Vec z;
  double obj = 0.0;
};

OracleResult active_set_oracle(const QpProblem& p) {
  const int n = static_cast<int>(p.H.rows());
  const int m = static_cast<int>(p.A_in.rows());
  OracleResult best;
  for (long mask = 0; mask < (1L << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if ((mask >> i) & 1) act.push_back(i);
    if (static_cast<int>(act.size()) > n) continue;
    const int k = static_cast<int>(act.size());
    Mat KKT(n + k, n + k);
    KKT.setZero();
    KKT.topLeftCorner(n, n) = p.H;
    Vec rhs(n + k);
    rhs.head(n) = -p.f;
    for (int i = 0; i < k; ++i) {
      KKT.block(n + i, 0, 1, n) = p.A_in.row(act[i]);
      KKT.block(0, n + i, n, 1) = p.A_in.row(act[i]).transpose();
      rhs(n + i) = p.b_in(act[i]);
    }
    Eigen::FullPivLU<Mat> lu(KKT);
    if (lu.rank() < n + k) continue;
    const Vec sol = lu.solve(rhs);
    const Vec z = sol.head(n);
    const Vec lam = sol.tail(k);
    if (lam.size() > 0 && lam.minCoeff() < -1e-9) continue;
    if (m > 0 && (p.A_in * z - p.b_in).maxCoeff() > 1e-9) continue;
    const double obj = 0.5 * z.dot(p.H * z) + p.f.dot(z);
    if (!best.found || obj < best.obj) {
      best.found = true;
      best.z = z;
      best.obj = obj;
    }
  }
  return best;
}

QpProblem random_qp(std::mt19937_64& gen, int n, int m) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat L(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) L(i, j) = nd(gen);
  Mat H = L * L.transpose() + 0.5 * Mat::Identity(n, n);
  Vec f(n);
  for (int i = 0; i < n; ++i) f(i) = nd(gen);
  Mat A(m, n);
  Vec b(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = nd(gen);
    b(i) = 1.0 + std::abs(nd(gen));  // keeps the origin feasible
  }
  return QpProblem(H, f, A, b);
}

}  // namespace

TEST_SUITE_BEGIN("qp");

TEST_CASE("single active constraint and unconstrained solve") {
  // min x^2 s.t. x >= 1
  QpProblem p1(Mat::Constant(1, 1, 2.0), Vec::Zero(1), Mat::Constant(1, 1, -1.0),
               Vec::Constant(1, -1.0));
  auto s1 = solve(p1);
  REQUIRE(s1.status == QpStatus::optimal);
  CHECK(s1.z(0) == doctest::Approx(1.0).epsilon(1e-7));

  QpProblem p2(Mat::Identity(2, 2), (Vec(2) << -1, -2).finished(), Mat(0, 2), Vec(0));
  auto s2 = solve(p2);
  REQUIRE(s2.status == QpStatus::optimal);
  CHECK(s2.z(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s2.z(1) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("100 random strictly convex QPs match the active-set oracle") {
  std::mt19937_64 gen(123);
  std::uniform_int_distribution<int> nn(2, 6), mm(1, 10);
  int solved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    QpProblem p = random_qp(gen, nn(gen), mm(gen));
    auto oracle = active_set_oracle(p);
    REQUIRE(oracle.found);
    auto sol = solve(p);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK((sol.z - oracle.z).lpNorm<Eigen::Infinity>() <= 1e-6);
    CHECK(sol.kkt_stationarity <= 1e-8);
    CHECK(sol.kkt_primal <= 1e-8);
    CHECK(sol.kkt_complementarity <= 1e-8);
    CHECK((sol.lambda.size() == 0 || sol.lambda.minCoeff() >= -1e-8));
    ++solved;
  }
  CHECK(solved == 100);
}

TEST_CASE("objective at the solution beats random feasible points") {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> nd(0.0, 1.0);
  QpProblem p = random_qp(gen, 4, 6);
  auto sol = solve(p);
  REQUIRE(sol.status == QpStatus::optimal);
  int checked = 0;
  for (int k = 0; k < 5000 && checked < 1000; ++k) {
    Vec z(4);
    for (int i = 0; i < 4; ++i) z(i) = 2.0 * nd(gen);
    if ((p.A_in * z - p.b_in).maxCoeff() > 0) continue;
    ++checked;
    CHECK(0.5 * z.dot(p.H * z) + p.f.dot(z) >= sol.objective - 1e-8);
  }
  CHECK(checked >= 100);
}

TEST_CASE("determinism: identical inputs, identical iterates") {
  std::mt19937_64 gen(88);
  QpProblem p = random_qp(gen, 5, 8);
  auto a = solve(p);
  auto b = solve(p);
  CHECK((a.z - b.z).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("infeasibility is certified") {
  // x <= -1 and x >= 1
  Mat A(2, 1);
  A << 1, -1;
  Vec b(2);
  b << -1, -1;
  QpProblem p(Mat::Identity(1, 1), Vec::Zero(1), A, b);
  auto sol = solve(p);
  CHECK(sol.status == QpStatus::infeasible);
}

TEST_CASE("H must be positive semidefinite; tiny negative shift tolerated") {
  CHECK_THROWS(QpProblem(-Mat::Identity(2, 2), Vec::Zero(2), Mat(0, 2), Vec(0)));
  QpProblem ok(Mat::Identity(2, 2) * 1e-12 - Mat::Identity(2, 2) * 1e-11,
               Vec::Zero(2), Mat(0, 2), Vec(0));  // min eig ~ -9e-12, shifted
  Eigen::SelfAdjointEigenSolver<Mat> es(ok.H);
  CHECK(es.eigenvalues().minCoeff() >= 0.0);
}

TEST_CASE("condense: N=1 scalar chain against the hand expansion") {
  // dynamics s+ = a s + b u; cost s^2 q + u^2 r + p (a s + b u)^2
  const double a = 0.8, bb = 0.5, q = 2.0, r = 0.3, pp = 1.7;
  auto box1 = geometry::HPolytope::symmetric_box(Vec::Constant(1, 10.0));
  auto condensed =
      condense(Mat::Constant(1, 1, a), Mat::Constant(1, 1, bb), 1,
               Mat::Constant(1, 1, q), Mat::Constant(1, 1, r), Mat::Constant(1, 1, pp),
               box1, box1, box1, box1);
  // H/2 = [[q + p a^2, p a b], [p a b, r + p b^2]]
  Mat Hh = 0.5 * condensed.H;
  CHECK(Hh(0, 0) == doctest::Approx(q + pp * a * a));
  CHECK(Hh(0, 1) == doctest::Approx(pp * a * bb));
  CHECK(Hh(1, 1) == doctest::Approx(r + pp * bb * bb));

  CHECK_THROWS(condense(Mat::Constant(1, 1, a), Mat::Constant(1, 1, bb), 1,
                        Mat::Constant(1, 1, q), Mat::Zero(1, 1),
                        Mat::Constant(1, 1, pp), box1, box1, box1, box1));
}

TEST_CASE("condense: trajectory reconstruction satisfies the dynamics") {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat A(3, 3), B(3, 1);
  for (int i = 0; i < 9; ++i) A(i / 3, i % 3) = 0.3 * nd(gen);
  for (int i = 0; i < 3; ++i) B(i, 0) = nd(gen);
  auto boxS = geometry::HPolytope::symmetric_box(Vec::Constant(3, 5.0));
  auto boxU = geometry::HPolytope::symmetric_box(Vec::Constant(1, 5.0));
  auto c = condense(A, B, 7, Mat::Identity(3, 3), Mat::Identity(1, 1),
                    Mat::Identity(3, 3), boxS, boxU, boxS, boxS);
  Vec z(c.num_vars());
  for (int i = 0; i < z.size(); ++i) z(i) = nd(gen);
  Mat traj = c.trajectory(z);
  for (int i = 0; i < 7; ++i) {
    const Vec u = z.segment(3 + i, 1);
    CHECK((traj.col(i + 1) - (A * traj.col(i) + B * u)).lpNorm<Eigen::Infinity>() <=
          1e-10);
  }
}

TEST_CASE("warm start accelerates a nearby solve") {
  std::mt19937_64 gen(55);
  QpProblem p = random_qp(gen, 6, 9);
  auto cold = solve(p);
  REQUIRE(cold.status == QpStatus::optimal);
  Vec b2 = p.b_in;
  b2.array() += 0.01;
  AdmmSolver solver(p.H, p.A_in);
  auto warm = solver.solve(p.f, b2, &cold.z, &cold.lambda);
  auto cold2 = solver.solve(p.f, b2);
  CHECK(warm.status == QpStatus::optimal);
  CHECK(warm.iterations <= cold2.iterations);
}

TEST_SUITE_END();
