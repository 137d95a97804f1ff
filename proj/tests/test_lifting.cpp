#include <doctest.h>

#include <cmath>
#include <random>

#include "rkmpc/lifting.hpp"

using namespace rkmpc;
using namespace rkmpc::lifting;

namespace {
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

std::vector<Vec> random_samples(int count, uint64_t seed, double range = 2.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-range, range);
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) out.push_back(v2(u(gen), u(gen)));
  return out;
}
}  // namespace

TEST_SUITE_BEGIN("lifting");

TEST_CASE("gaussian kernel values and resetting") {
  auto d = build_dictionary(KernelKind::gaussian, {v2(1, 0)}, 2);
  // raw kernel at its center is 1; the reset subtracts exp(-|c|^2)
  const Vec s = lift(d, v2(1, 0));
  CHECK(s(2) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK((lift(d, Vec::Zero(2))).norm() == doctest::Approx(0.0));
}

TEST_CASE("Psi(0) = 0 for every kind") {
  std::vector<Dictionary> dicts = {
      build_dictionary(KernelKind::thinplate, {v2(0.4, -0.3), v2(0.3, -0.9)}, 2),
      build_dictionary(KernelKind::gaussian, {v2(-0.6, -1.1), v2(-1.0, 0.8)}, 2),
      build_dictionary(KernelKind::polyharmonic, {v2(0.5, 0.5), v2(-0.7, 0.2)}, 2),
      build_dictionary(KernelKind::inverse_quadratic, {v2(1, 1), v2(-1, 0.5)}, 2),
      build_polynomial_dictionary(2, 3)};
  for (const auto& d : dicts) {
    CHECK(lift(d, Vec::Zero(2)).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(d.lifted_dim() == 2 + d.basis_count());
  }
}

TEST_CASE("thinplate at unit distance is exactly zero") {
  auto d = build_dictionary(KernelKind::thinplate, {v2(1, 0)}, 2);
  // 1^2 log 1 = 0, so only the offset remains
  const Vec s = lift(d, v2(2, 0));
  CHECK(s(2) == doctest::Approx(0.0 - d.offsets(0)).epsilon(1e-14));
}

TEST_CASE("paper Van der Pol dictionary lift") {
  auto d = build_dictionary(KernelKind::thinplate,
                            {v2(0.381, -0.341), v2(0.267, -0.889)}, 2);
  const Vec x = v2(1.5, -1.5);
  const Vec s = lift(d, x);
  REQUIRE(s.size() == 4);
  CHECK(s(0) == doctest::Approx(1.5));
  CHECK(s(1) == doctest::Approx(-1.5));
  // tail entries by direct kernel evaluation
  auto tp = [](double r2) { return r2 > 0 ? r2 * std::log(std::sqrt(r2)) : 0.0; };
  const double t1 = tp((x - d.centers[0]).squaredNorm()) - tp(d.centers[0].squaredNorm());
  const double t2 = tp((x - d.centers[1]).squaredNorm()) - tp(d.centers[1].squaredNorm());
  CHECK(s(2) == doctest::Approx(t1).epsilon(1e-14));
  CHECK(s(3) == doctest::Approx(t2).epsilon(1e-14));
}

TEST_CASE("lift rejects bad input; duplicate centers rejected") {
  auto d = build_dictionary(KernelKind::gaussian, {v2(1, 0)}, 2);
  CHECK_THROWS(lift(d, (Vec(2) << std::nan(""), 0.0).finished()));
  CHECK_THROWS(lift(d, Vec::Zero(3)));
  CHECK_THROWS_AS(build_dictionary(KernelKind::gaussian, {v2(1, 0), v2(1, 0)}, 2), Error);
  CHECK_THROWS_AS(build_dictionary(KernelKind::polyharmonic, {v2(0, 0)}, 2), Error);
}

TEST_CASE("analytic Jacobian matches central differences") {
  std::vector<Dictionary> dicts = {
      build_dictionary(KernelKind::thinplate, {v2(0.4, -0.3), v2(0.3, -0.9)}, 2),
      build_dictionary(KernelKind::gaussian, {v2(-0.6, -1.1)}, 2),
      build_dictionary(KernelKind::polyharmonic, {v2(0.5, 0.5)}, 2),
      build_dictionary(KernelKind::inverse_quadratic, {v2(1, 1)}, 2),
      build_polynomial_dictionary(2, 3)};
  for (const auto& d : dicts) {
    const auto samples = random_samples(100, 42 + d.basis_count());
    for (const auto& x : samples) {
      bool near_center = false;
      for (const auto& c : d.centers) near_center |= ((x - c).norm() < 1e-3);
      if (near_center) continue;  // FD is ill-conditioned across kernel kinks
      const Mat J = lift_jacobian(d, x);
      const Mat Jfd = lift_jacobian_fd(d, x);
      CHECK((J - Jfd).lpNorm<Eigen::Infinity>() <=
            1e-6 * std::max(1.0, J.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST_CASE("kernel symmetry about the center") {
  for (auto kind : {KernelKind::thinplate, KernelKind::gaussian,
                    KernelKind::polyharmonic, KernelKind::inverse_quadratic}) {
    auto d = build_dictionary(kind, {v2(0.7, -0.2)}, 2);
    std::mt19937_64 gen(11);
    std::normal_distribution<double> n(0.0, 0.5);
    for (int k = 0; k < 50; ++k) {
      const Vec delta = v2(n(gen), n(gen));
      const double a = lift(d, Vec(d.centers[0] + delta))(2);
      const double b = lift(d, Vec(d.centers[0] - delta))(2);
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
  }
}

TEST_CASE("rank_check: pass, collinear failure, identity block") {
  // n+1 affinely independent gaussian centers -> rank n
  auto good = build_dictionary(KernelKind::gaussian, {v2(0, 0), v2(1, 0), v2(0, 1)}, 2,
                               /*includes_state=*/false);
  auto rep = rank_check(good, random_samples(50, 13));
  CHECK(rep.pass);

  // all centers on one line: deficiency shows at x = c_i
  auto bad = build_dictionary(KernelKind::gaussian,
                              {v2(0, 0), v2(0.5, 0), v2(1.0, 0)}, 2, false);
  std::vector<Vec> at_centers = bad.centers;
  auto rep2 = rank_check(bad, at_centers);
  CHECK_FALSE(rep2.pass);
  CHECK(rep2.min_rank < 2);

  // identity block makes the rank trivial
  auto with_state = build_dictionary(KernelKind::gaussian, {v2(0.5, 0)}, 2, true);
  CHECK(rank_check(with_state, random_samples(20, 14)).pass);
}

TEST_CASE("grid Lipschitz estimate certifies sampled pairs") {
  auto d = build_dictionary(KernelKind::thinplate,
                            {v2(0.381, -0.341), v2(0.267, -0.889)}, 2);
  auto X = geometry::HPolytope::symmetric_box(v2(2.5, 2.5));
  const double L = lipschitz_estimate(d, X, 21);
  CHECK(L > 0.0);
  std::mt19937_64 gen(15);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int k = 0; k < 200; ++k) {
    const Vec x1 = v2(u(gen), u(gen));
    Vec x2 = x1 + 1e-3 * v2(u(gen), u(gen)) / 2.5;
    const double lhs = (lift(d, x1) - lift(d, x2)).norm();
    // the grid estimate under-resolves off-grid gradients slightly
    CHECK(lhs <= 1.05 * L * (x1 - x2).norm() + 1e-12);
  }
}

TEST_SUITE_END();
