#include "rkmpc/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "rkmpc/kernels.hpp"

namespace rkmpc::uncertainty {

namespace {
constexpr double kFloorWidth = 1e-9;  // degenerate coordinates get this half-width
}

Residuals residuals(const edmd::LiftedModel& model, edmd::Dataset& ds) {
  require(ds.tag != model.meta.dataset_tag || ds.seed != model.meta.dataset_seed,
          "residuals: validation dataset must be disjoint from the fitting dataset "
          "(same split tag and seed)");
  ds.lift_with(model.dictionary);
  require(ds.dict_fingerprint == model.dictionary.fingerprint(),
          "residuals: dataset/model dictionary mismatch");
  Residuals r;
  const int L = ds.count();
  r.w_bar.resize(model.lifted_dim(), L);
  r.v.resize(model.state_dim(), L);
  const Mat& A = model.A;
  const Mat& B = model.B;
  const Mat& C = model.C;
  kernels::for_each_index(L, [&](int i) {
    // nominal one-step prediction: the disturbance term is excluded, so w_bar
    // absorbs D w_hat + w
    r.w_bar.col(i) = ds.Sp.col(i) - (A * ds.S.col(i) + B * ds.U.col(i));
    r.v.col(i) = ds.X.col(i) - C * ds.S.col(i);
  });
  return r;
}

double hoeffding_epsilon(int L, double delta_r) {
  require(L >= 1, "hoeffding_epsilon: L must be >= 1");
  require(delta_r > 0.0 && delta_r < 1.0, "hoeffding_epsilon: delta_r must be in (0,1)");
  return std::sqrt(-std::log(0.5 * delta_r) / (2.0 * static_cast<double>(L)));
}

namespace {

double outside_fraction(const geometry::Zonotope& set, const Mat& samples) {
  int out = 0;
  const int L = static_cast<int>(samples.cols());
  for (int i = 0; i < L; ++i)
    if (!geometry::contains(set, samples.col(i))) ++out;
  return static_cast<double>(out) / L;
}

}  // namespace

ValidationReport validate_sets(const geometry::Zonotope& W_cand,
                               const geometry::Zonotope& V_cand,
                               const Residuals& res, double G_bar_w, double G_bar_v,
                               double delta_r) {
  ValidationReport rep;
  rep.L = res.count();
  require(rep.L >= 1, "validate_sets: no residuals");
  rep.delta_r = delta_r;
  rep.G_bar_w = G_bar_w;
  rep.G_bar_v = G_bar_v;
  rep.epsilon = hoeffding_epsilon(rep.L, delta_r);
  rep.empirical_risk_w = outside_fraction(W_cand, res.w_bar);
  rep.empirical_risk_v = outside_fraction(V_cand, res.v);
  rep.passed_w = G_bar_w >= rep.empirical_risk_w + rep.epsilon;
  rep.passed_v = G_bar_v >= rep.empirical_risk_v + rep.epsilon;
  return rep;
}

namespace {

// per-coordinate empirical (q_lo, q_hi) interval, widened to cover the origin
// and floored so downstream invariant sets stay full-dimensional
geometry::Zonotope quantile_box(const Mat& samples, double G_bar) {
  const int d = static_cast<int>(samples.rows());
  const int L = static_cast<int>(samples.cols());
  Vec lo(d), hi(d);
  std::vector<double> col(L);
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < L; ++k) col[k] = samples(i, k);
    std::sort(col.begin(), col.end());
    const int ilo = std::clamp(static_cast<int>(std::floor(0.5 * G_bar * L)), 0, L - 1);
    const int ihi = std::clamp(static_cast<int>(std::ceil((1.0 - 0.5 * G_bar) * L)) - 1,
                               0, L - 1);
    lo(i) = std::min(col[ilo], -kFloorWidth);
    hi(i) = std::max(col[ihi], kFloorWidth);
  }
  return geometry::Zonotope::box(0.5 * (lo + hi), 0.5 * (hi - lo));
}

geometry::Zonotope grown(const geometry::Zonotope& box, double factor) {
  return geometry::Zonotope(box.center, factor * box.generators);
}

}  // namespace

EstimatedSets estimate_sets(const Residuals& res, double G_bar, double delta_r,
                            double gamma_w, double gamma_v, double growth) {
  require(res.count() >= 1, "estimate_sets: no residuals");
  require(growth > 1.0, "estimate_sets: growth must be > 1");
  require(gamma_w > 1.0 && gamma_v > 1.0, "estimate_sets: gamma factors must be > 1");

  EstimatedSets out;
  geometry::Zonotope W = quantile_box(res.w_bar, G_bar);
  geometry::Zonotope V = quantile_box(res.v, G_bar);

  const int cap = 100;
  for (int it = 0; it <= cap; ++it) {
    ValidationReport rep = validate_sets(W, V, res, G_bar, G_bar, delta_r);
    if (rep.passed()) {
      out.grow_iterations = it;
      out.W_bar = W.scaled(gamma_w);
      out.V = V.scaled(gamma_v);
      out.report = validate_sets(out.W_bar, out.V, res, G_bar, G_bar, delta_r);
      out.report.gamma_w = gamma_w;
      out.report.gamma_v = gamma_v;
      return out;
    }
    if (it == cap) break;
    if (!rep.passed_w) W = grown(W, growth);
    if (!rep.passed_v) V = grown(V, growth);
  }
  throw NumericalError(
      "estimate_sets: growth cap reached without validation; the residuals do not "
      "match the model (or L is too small for the requested confidence)");
}

std::pair<geometry::Zonotope, geometry::Zonotope> scale_bounds(
    double L_s, double L_u, double L_dw, double L_what, double L_psi, double L_v,
    double d_x, double d_u, double d_dw, double d_what, int n_psi, int n) {
  require(L_s >= 0 && L_u >= 0 && L_dw >= 0 && L_what >= 0 && L_psi >= 0 && L_v >= 0 &&
              d_x >= 0 && d_u >= 0 && d_dw >= 0 && d_what >= 0,
          "scale_bounds: all inputs must be >= 0");
  const double rw = L_s * L_psi * d_x + L_u * d_u + L_dw * d_dw + L_what * d_what;
  const double rv = L_v * d_x;
  return {geometry::Zonotope::symmetric_box(Vec::Constant(n_psi, rw)),
          geometry::Zonotope::symmetric_box(Vec::Constant(n, rv))};
}

}  // namespace rkmpc::uncertainty
