#include <doctest.h>

#include <cmath>
#include <random>

#include "rkmpc/uncertainty.hpp"

using namespace rkmpc;
using namespace rkmpc::uncertainty;

namespace {

edmd::LiftedModel tiny_model() {
  edmd::LiftedModel m;
  m.A = (Mat(2, 2) << 0.5, 0.1, 0.0, 0.4).finished();
  m.B = (Mat(2, 1) << 1.0, 0.5).finished();
  m.C = Mat::Identity(2, 2);
  m.D = Mat::Identity(2, 2);
  m.dictionary = lifting::build_dictionary(lifting::KernelKind::gaussian, {}, 2, true);
  m.meta.dataset_tag = "fit";
  m.meta.dataset_seed = 1;
  return m;
}

Residuals uniform_residuals(int L, uint64_t seed, double half_width = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-half_width, half_width);
  Residuals r;
  r.w_bar.resize(2, L);
  r.v.resize(2, L);
  for (int i = 0; i < L; ++i)
    for (int k = 0; k < 2; ++k) {
      r.w_bar(k, i) = u(gen);
      r.v(k, i) = u(gen);
    }
  return r;
}

}  // namespace

TEST_SUITE_BEGIN("uncertainty");

TEST_CASE("residuals: exact data gives zero; hand computation on one tuple") {
  auto model = tiny_model();
  edmd::Dataset ds;
  ds.tag = "validate";
  ds.seed = 2;
  const int L = 20;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0.0, 1.0);
  ds.X.resize(2, L);
  ds.U.resize(1, L);
  ds.W = Mat::Zero(2, L);
  ds.Xp.resize(2, L);
  for (int i = 0; i < L; ++i) {
    ds.X.col(i) << n(gen), n(gen);
    ds.U.col(i) << n(gen);
    ds.Xp.col(i) = model.A * ds.X.col(i) + model.B * ds.U.col(i);
  }
  auto res = residuals(model, ds);
  CHECK(res.w_bar.lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(res.v.lpNorm<Eigen::Infinity>() <= 1e-12);

  // single tuple by hand
  edmd::Dataset one;
  one.tag = "validate";
  one.seed = 3;
  one.X = (Mat(2, 1) << 1.0, -1.0).finished();
  one.U = (Mat(1, 1) << 0.5).finished();
  one.W = Mat::Zero(2, 1);
  one.Xp = (Mat(2, 1) << 2.0, 0.25).finished();
  auto r1 = residuals(model, one);
  // w = x+ - (A x + B u) = (2, 0.25) - (0.5 - 0.1 + 0.5, -0.4 + 0.25)
  CHECK(r1.w_bar(0, 0) == doctest::Approx(2.0 - (0.5 - 0.1 + 0.5)));
  CHECK(r1.w_bar(1, 0) == doctest::Approx(0.25 - (-0.4 + 0.25)));
  CHECK(r1.v.lpNorm<Eigen::Infinity>() <= 1e-12);  // C = I, includes_state

  // same tag and seed as the fit set is rejected
  edmd::Dataset same = one;
  same.tag = "fit";
  same.seed = 1;
  CHECK_THROWS_AS(residuals(model, same), Error);
}

TEST_CASE("hoeffding epsilon formula and scaling") {
  const double eps = hoeffding_epsilon(10000, 0.01);
  CHECK(eps == doctest::Approx(std::sqrt(-std::log(0.005) / 20000.0)).epsilon(1e-15));
  // quadrupling L halves epsilon
  CHECK(hoeffding_epsilon(40000, 0.01) == doctest::Approx(0.5 * eps).epsilon(1e-12));
  CHECK_THROWS(hoeffding_epsilon(0, 0.01));
  CHECK_THROWS(hoeffding_epsilon(100, 2.0));
  CHECK_THROWS(hoeffding_epsilon(100, 0.0));
}

TEST_CASE("validate_sets: containment, point sets, boundary inclusivity") {
  auto res = uniform_residuals(10000, 5);
  auto W = geometry::Zonotope::symmetric_box(Vec::Constant(2, 1.001));
  auto V = W;
  auto rep = validate_sets(W, V, res, 0.05, 0.05, 0.01);
  CHECK(rep.empirical_risk_w == 0.0);
  CHECK(rep.epsilon == doctest::Approx(0.016276236).epsilon(1e-6));
  CHECK(rep.passed_w);
  CHECK(rep.passed_v);

  auto P0 = geometry::Zonotope::point(Vec::Zero(2));
  auto rep0 = validate_sets(P0, P0, res, 0.5, 0.5, 0.01);
  CHECK(rep0.empirical_risk_w == 1.0);
  CHECK_FALSE(rep0.passed_w);

  // exactly G_hat + eps == G_bar passes (inclusive)
  auto repb = validate_sets(W, V, res, rep.epsilon, rep.epsilon, 0.01);
  CHECK(repb.passed_w);
}

TEST_CASE("estimate_sets: uniform residual quantiles") {
  auto res = uniform_residuals(100000, 6);
  auto est = estimate_sets(res, 0.05, 0.01, 1.1, 1.1, 1.1);
  CHECK(est.report.passed());
  const double hw = est.W_bar.radii()(0);
  CHECK(hw >= 0.95 * 1.1 * 0.98);        // quantile ~0.95 then gamma_w
  CHECK(hw <= 1.1 * 1.1 * 1.02);         // at most one growth step past the quantile
  CHECK(est.report.gamma_w == 1.1);
}

TEST_CASE("estimate_sets: zero residuals floor at 1e-9") {
  Residuals res;
  res.w_bar = Mat::Zero(2, 2000);
  res.v = Mat::Zero(2, 2000);
  auto est = estimate_sets(res, 0.05, 0.01);
  CHECK(est.W_bar.radii()(0) >= 1e-9);
  CHECK(est.W_bar.radii()(0) <= 2e-9 * 1.1);
  CHECK(est.report.passed());
  CHECK(geometry::contains(est.W_bar, Vec::Zero(2)));
}

TEST_CASE("candidates covering every residual pass immediately when G_bar > eps") {
  auto res = uniform_residuals(5000, 7);
  // interval hull of all residuals: the empirical risk is 0 by construction
  Vec hw(2);
  for (int k = 0; k < 2; ++k)
    hw(k) = std::max(res.w_bar.row(k).cwiseAbs().maxCoeff(),
                     res.v.row(k).cwiseAbs().maxCoeff());
  auto hull = geometry::Zonotope::symmetric_box(hw);
  auto rep = validate_sets(hull, hull, res, 0.05, 0.05, 0.01);
  CHECK(rep.empirical_risk_w == 0.0);
  CHECK(rep.empirical_risk_v == 0.0);
  CHECK(rep.epsilon < 0.05);
  CHECK(rep.passed());

  auto est = estimate_sets(res, 0.5, 0.01);
  CHECK(est.report.passed());
}

TEST_CASE("monotonicity: enlarging a candidate set never raises the risk") {
  auto res = uniform_residuals(2000, 8);
  auto W1 = geometry::Zonotope::symmetric_box(Vec::Constant(2, 0.5));
  auto W2 = geometry::Zonotope::symmetric_box(Vec::Constant(2, 0.8));
  auto r1 = validate_sets(W1, W1, res, 0.5, 0.5, 0.01);
  auto r2 = validate_sets(W2, W2, res, 0.5, 0.5, 0.01);
  CHECK(r2.empirical_risk_w <= r1.empirical_risk_w);
  CHECK(r2.empirical_risk_v <= r1.empirical_risk_v);
}

TEST_CASE("fresh-data check: third batch outside fraction bounded") {
  auto res = uniform_residuals(20000, 9);
  auto est = estimate_sets(res, 0.05, 0.01);
  auto fresh = uniform_residuals(20000, 10);
  auto rep = validate_sets(est.W_bar, est.V, fresh, 0.05, 0.05, 0.01);
  CHECK(rep.empirical_risk_w <= 0.05 + 2.0 * rep.epsilon);
  CHECK(rep.empirical_risk_v <= 0.05 + 2.0 * rep.epsilon);
}

TEST_CASE("scale_bounds") {
  auto [dw, dv] = scale_bounds(0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 3, 2);
  CHECK(dw.radii().lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(dv.radii().lpNorm<Eigen::Infinity>() == 0.0);

  auto [dw1, dv1] = scale_bounds(1.0, 0, 0, 0, 2.0, 0, 0.1, 0, 0, 0, 3, 2);
  CHECK(dw1.radii()(0) == doctest::Approx(0.2));
  CHECK_THROWS(scale_bounds(-1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 2));
}

TEST_SUITE_END();
