#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numbers>
#include <random>

#include "rkmpc/geometry.hpp"

using namespace rkmpc;
using namespace rkmpc::geometry;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

Zonotope random_zonotope(std::mt19937_64& gen, int dim, int g) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec c(dim);
  Mat G(dim, g);
  for (int i = 0; i < dim; ++i) {
    c(i) = n(gen);
    for (int j = 0; j < g; ++j) G(i, j) = n(gen);
  }
  return Zonotope(c, G);
}

Mat random_stable(std::mt19937_64& gen, int dim, double rho_target) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat F(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) F(i, j) = n(gen);
  const double rho = F.eigenvalues().cwiseAbs().maxCoeff();
  return F * (rho_target / rho);
}

// 2-D membership oracle: enumerate all corner points c + sum (+-)g_i, take the
// convex hull implicitly via all-edges half-plane checks
bool hull_contains_2d(const Zonotope& Z, const Vec& x, double tol = 1e-9) {
  const int g = Z.num_generators();
  std::vector<Vec> pts;
  for (long mask = 0; mask < (1L << g); ++mask) {
    Vec p = Z.center;
    for (int i = 0; i < g; ++i) p += ((mask >> i) & 1 ? 1.0 : -1.0) * Z.generators.col(i);
    pts.push_back(p);
  }
  // x is in the hull iff no strictly separating edge direction exists
  for (size_t a = 0; a < pts.size(); ++a)
    for (size_t b = 0; b < pts.size(); ++b) {
      if (a == b) continue;
      Vec e = pts[b] - pts[a];
      if (e.norm() < 1e-12) continue;
      Vec nrm = v2(-e(1), e(0));
      double hmax = -1e300;
      for (const auto& p : pts) hmax = std::max(hmax, nrm.dot(p));
      if (nrm.dot(x) > hmax + tol) return false;
    }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("support: unit box, point, two generators") {
  Zonotope box = Zonotope::symmetric_box(v2(1, 1));
  CHECK(support(box, v2(1, 0)) == doctest::Approx(1.0));

  Zonotope pt = Zonotope::point(v2(2, 3));
  CHECK(support(pt, v2(0, 1)) == doctest::Approx(3.0));

  // oracle: enumerate all 4 vertices of {(1,0),(1,1)} and take the max projection
  Mat G(2, 2);
  G << 1, 1, 0, 1;
  Zonotope Z(Vec::Zero(2), G);
  const Vec d = v2(1, 0);
  double best = -1e300;
  for (int s0 : {-1, 1})
    for (int s1 : {-1, 1})
      best = std::max(best, d.dot(s0 * G.col(0) + s1 * G.col(1)));
  CHECK(best == doctest::Approx(2.0));
  CHECK(support(Z, d) == doctest::Approx(best));

  CHECK_THROWS_AS(support(Z, Vec::Ones(3)), DimensionError);
}

TEST_CASE("minkowski sum: intervals, identity, support additivity") {
  Zonotope a = Zonotope::symmetric_box(Vec::Ones(1));
  Zonotope b = Zonotope::symmetric_box(Vec::Constant(1, 2.0));
  Zonotope s = minkowski_sum(a, b);
  CHECK(support(s, Vec::Ones(1)) == doctest::Approx(3.0));
  CHECK(support(s, -Vec::Ones(1)) == doctest::Approx(3.0));

  Zonotope z = minkowski_sum(a, Zonotope::point(Vec::Zero(1)));
  CHECK(z.num_generators() == a.num_generators());
  CHECK(support(z, Vec::Ones(1)) == doctest::Approx(1.0));

  std::mt19937_64 gen(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Zonotope Z1 = random_zonotope(gen, 2, 3);
    Zonotope Z2 = random_zonotope(gen, 2, 4);
    Zonotope S = minkowski_sum(Z1, Z2);
    Vec d = v2(n(gen), n(gen));
    CHECK(support(S, d) ==
          doctest::Approx(support(Z1, d) + support(Z2, d)).epsilon(1e-12));
  }
}

TEST_CASE("linear map: identity, scaling, adjoint oracle") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> n(0.0, 1.0);
  Zonotope Z = random_zonotope(gen, 2, 3);
  Zonotope ZI = linear_map(Mat::Identity(2, 2), Z);
  CHECK((ZI.center - Z.center).norm() == doctest::Approx(0.0));
  CHECK((ZI.generators - Z.generators).norm() == doctest::Approx(0.0));

  Zonotope box = Zonotope::symmetric_box(v2(1, 1));
  Zonotope scaled = linear_map(2.0 * Mat::Identity(2, 2), box);
  CHECK(support(scaled, v2(1, 0)) == doctest::Approx(2.0));

  for (int trial = 0; trial < 100; ++trial) {
    Mat M(2, 2);
    for (int i = 0; i < 4; ++i) M(i / 2, i % 2) = n(gen);
    Zonotope Zr = random_zonotope(gen, 2, 4);
    Vec d = v2(n(gen), n(gen));
    CHECK(support(linear_map(M, Zr), d) ==
          doctest::Approx(support(Zr, M.transpose() * d)).epsilon(1e-12));
  }
}

TEST_CASE("pontryagin difference: box shrink, zero set, empty result") {
  HPolytope P = HPolytope::symmetric_box(v2(2, 2));
  Zonotope Zb = Zonotope::symmetric_box(v2(1, 1));
  HPolytope D = pontryagin_diff(P, Zb);
  CHECK((D.b - Vec::Ones(4)).norm() == doctest::Approx(0.0));

  HPolytope D0 = pontryagin_diff(P, Zonotope::point(Vec::Zero(2)));
  CHECK((D0.b - P.b).norm() == doctest::Approx(0.0));

  HPolytope E = pontryagin_diff(HPolytope::symmetric_box(v2(1, 1)),
                                Zonotope::symmetric_box(v2(2, 2)));
  CHECK(E.is_empty());
  // grid oracle: no point of a fine grid survives
  bool any = false;
  for (double x = -1; x <= 1; x += 0.05)
    for (double y = -1; y <= 1; y += 0.05) any = any || contains(E, v2(x, y));
  CHECK_FALSE(any);
}

TEST_CASE("tightening soundness property") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    HPolytope P = HPolytope::symmetric_box(v2(2.0 + u(gen), 2.0 + u(gen)));
    Zonotope Z = random_zonotope(gen, 2, 3);
    Z.center.setZero();
    Z.generators *= 0.3;
    HPolytope D = pontryagin_diff(P, Z);
    if (D.is_empty()) continue;
    // sample x in D via rejection from the bounding box, z as a random vertex
    for (int k = 0; k < 20; ++k) {
      Vec x = v2(n(gen), n(gen));
      if (!contains(D, x)) continue;
      Vec z = Z.center;
      for (int j = 0; j < Z.num_generators(); ++j)
        z += (n(gen) > 0 ? 1.0 : -1.0) * Z.generators.col(j);
      CHECK(contains(P, Vec(x + z), 1e-9));
    }
  }
}

TEST_CASE("rpi_set: F = 0 and the scalar geometric series") {
  Zonotope W = Zonotope::symmetric_box(v2(1, 0.5));
  Zonotope Z0 = rpi_set(Mat::Zero(2, 2), W, 0.05, 50);
  CHECK(support(Z0, v2(1, 0)) == doctest::Approx(1.0));
  CHECK(support(Z0, v2(0, 1)) == doctest::Approx(0.5));

  Mat F(1, 1);
  F << 0.5;
  Zonotope W1 = Zonotope::symmetric_box(Vec::Ones(1));
  Zonotope Z = rpi_set(F, W1, 0.01, 200);
  const double h = support(Z, Vec::Ones(1));
  CHECK(h >= 2.0 - 1e-9);     // contains the true minimal RPI set [-2, 2]
  CHECK(h <= 2.0 * 1.01);     // within 1% at alpha_max = 0.01
}

TEST_CASE("rpi_set: support-function invariance certificate") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.3, 0.9);
  for (int trial = 0; trial < 20; ++trial) {
    Mat F = random_stable(gen, 2, u(gen));
    Zonotope W = Zonotope::symmetric_box(v2(1, 1));
    Zonotope Z = rpi_set(F, W, 0.05, 200);
    const Zonotope FZ_W = minkowski_sum(linear_map(F, Z), W);
    Mat dirs = certificate_directions(2);
    for (int j = 0; j < dirs.cols(); ++j) {
      const double hz = support(Z, dirs.col(j));
      const double hf = support(FZ_W, dirs.col(j));
      CHECK(hf - hz <= 1e-9 * (1.0 + hz));
    }
  }
}

TEST_CASE("rpi_set preconditions") {
  Mat F(1, 1);
  F << 1.1;
  CHECK_THROWS_AS(rpi_set(F, Zonotope::symmetric_box(Vec::Ones(1)), 0.05, 100),
                  NumericalError);
  F << 0.999999;  // contracts too slowly for k_max = 3
  CHECK_THROWS_AS(rpi_set(F, Zonotope::symmetric_box(Vec::Ones(1)), 0.05, 3),
                  NumericalError);
}

TEST_CASE("max_invariant_set: trivial cases and rotation-contraction") {
  HPolytope box = HPolytope::symmetric_box(v2(1, 2));
  HPolytope O0 = max_invariant_set(Mat::Zero(2, 2), box);
  // A = 0 maps everything to the origin: the whole constraint set is invariant
  for (double x : {-0.99, 0.0, 0.99})
    for (double y : {-1.99, 0.0, 1.99}) CHECK(contains(O0, v2(x, y)));

  HPolytope Oc = max_invariant_set(0.5 * Mat::Identity(2, 2), box);
  CHECK(contains(Oc, v2(0.999, 1.999)));

  const double th = 30.0 * std::numbers::pi / 180.0, rho = 0.9;
  Mat R(2, 2);
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  Mat A = rho * R;
  HPolytope Om = max_invariant_set(A, box);
  CHECK_FALSE(Om.is_empty());
  CHECK(Om.contains_origin(1e-9));
  // sampling oracle: boundary-ish points of Om stay in Om under A
  std::mt19937_64 gen(6);
  std::normal_distribution<double> n(0.0, 1.0);
  int tested = 0;
  for (int k = 0; k < 10000; ++k) {
    Vec dir = v2(n(gen), n(gen));
    if (dir.norm() < 1e-9) continue;
    auto h = support(Om, dir);
    REQUIRE(h.has_value());
    // point on the supporting hyperplane scaled just inside
    Vec x = *h / dir.squaredNorm() * dir * 0.999;
    if (!contains(Om, x)) continue;
    ++tested;
    CHECK(contains(Om, Vec(A * x), 1e-9));
  }
  CHECK(tested > 300);
}

TEST_CASE("contains: points and zonotopes") {
  Zonotope box = Zonotope::symmetric_box(v2(1, 1));
  CHECK(contains(box, Vec::Zero(2)));
  CHECK_FALSE(contains(box, v2(3, 0)));

  std::mt19937_64 gen(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    Zonotope Z = random_zonotope(gen, 2, 4);
    Vec x = v2(2.0 * n(gen), 2.0 * n(gen));
    CHECK(contains(Z, x, 1e-9) == hull_contains_2d(Z, x));
  }
}

TEST_CASE("zonotope_to_hrep: box, 3-generator membership oracle, degenerate") {
  Zonotope box = Zonotope::symmetric_box(v2(1, 1));
  HPolytope H = to_hrep(box);
  CHECK(H.num_rows() == 4);
  CHECK(contains(H, v2(0.99, -0.99)));
  CHECK_FALSE(contains(H, v2(1.01, 0)));

  std::mt19937_64 gen(8);
  std::normal_distribution<double> n(0.0, 1.0);
  Zonotope Z = random_zonotope(gen, 2, 3);
  HPolytope HZ = to_hrep(Z);
  CHECK(HZ.num_rows() <= 12);  // <= 6 facets as +- pairs
  for (int k = 0; k < 1000; ++k) {
    Vec x = v2(3.0 * n(gen), 3.0 * n(gen));
    CHECK(contains(HZ, x, 1e-8) == contains(Z, x, 1e-8));
  }

  // single generator segment in 2-D: degenerate, affine hull as paired rows
  Zonotope seg(v2(1, 1), (Mat(2, 1) << 1, 1).finished());
  CHECK(is_degenerate(seg));
  HPolytope Hs = to_hrep(seg);
  CHECK(contains(Hs, v2(2, 2), 1e-9));
  CHECK(contains(Hs, v2(0, 0), 1e-9));
  CHECK_FALSE(contains(Hs, v2(1.2, 0.8), 1e-9));
  CHECK_FALSE(contains(Hs, v2(2.5, 2.5), 1e-9));

  CHECK_THROWS(to_hrep(random_zonotope(gen, 2, 13)));
}

TEST_CASE("(A - B) + B is contained in A") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    HPolytope A = HPolytope::symmetric_box(v2(u(gen) + 1.0, u(gen) + 1.0));
    Zonotope B = random_zonotope(gen, 2, 2);
    B.center.setZero();
    B.generators *= 0.4;
    HPolytope D = pontryagin_diff(A, B);
    if (D.is_empty()) continue;
    for (int k = 0; k < 30; ++k) {
      Vec x = v2(3.0 * n(gen), 3.0 * n(gen));
      if (!contains(D, x)) continue;
      Vec z = B.center;
      for (int j = 0; j < B.num_generators(); ++j)
        z += std::clamp(n(gen), -1.0, 1.0) * B.generators.col(j);
      CHECK(contains(A, Vec(x + z), 1e-9));
    }
  }
}

TEST_CASE("reduce_order keeps an outer approximation") {
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 20; ++trial) {
    Zonotope Z = random_zonotope(gen, 3, 12);
    Zonotope R = reduce_order(Z, 2);
    CHECK(R.num_generators() <= 6);
    Mat dirs = certificate_directions(3, 200);
    for (int j = 0; j < dirs.cols(); ++j)
      CHECK(support(R, dirs.col(j)) >= support(Z, dirs.col(j)) - 1e-10);
  }
}

TEST_SUITE_END();
