#pragma once

#include "rkmpc/edmd.hpp"
#include "rkmpc/geometry.hpp"
#include "rkmpc/types.hpp"

namespace rkmpc::uncertainty {

/// Empirical one-step residuals of the nominal predictor: columns of `w_bar`
/// are Psi(x+) - (A Psi(x) + B u), columns of `v` are x - C Psi(x).
struct Residuals {
  Mat w_bar;  // n_psi x L
  Mat v;      // n x L
  int count() const { return static_cast<int>(w_bar.cols()); }
};

Residuals residuals(const edmd::LiftedModel& model, edmd::Dataset& ds);

struct ValidationReport {
  double empirical_risk_w = 0.0;  // fraction of residuals outside the candidate set
  double empirical_risk_v = 0.0;
  double epsilon = 0.0;
  bool passed_w = false;
  bool passed_v = false;
  int L = 0;
  double delta_r = 0.0;
  double G_bar_w = 0.0;
  double G_bar_v = 0.0;
  double gamma_w = 1.0;
  double gamma_v = 1.0;
  bool passed() const { return passed_w && passed_v; }
};

/// Hoeffding margin sqrt(-log(0.5 delta_r) / (2 L)), natural logarithm.
double hoeffding_epsilon(int L, double delta_r);

/// Risk evaluation of candidate sets against held-out residuals:
/// passed iff G_bar >= G_hat + epsilon (inclusive).
ValidationReport validate_sets(const geometry::Zonotope& W_cand,
                               const geometry::Zonotope& V_cand,
                               const Residuals& res, double G_bar_w, double G_bar_v,
                               double delta_r);

struct EstimatedSets {
  geometry::Zonotope W_bar;
  geometry::Zonotope V;
  ValidationReport report;
  int grow_iterations = 0;
};

/// Grow-and-validate loop: per-coordinate quantile boxes, inflated by `growth`
/// until the Hoeffding check passes (cap 100), then scaled by gamma_w/gamma_v.
EstimatedSets estimate_sets(const Residuals& res, double G_bar, double delta_r,
                            double gamma_w = 1.1, double gamma_v = 1.1,
                            double growth = 1.1);

/// Analytic inflation of the data-driven sets from Lipschitz constants and
/// data-coverage gaps; origin-centered boxes circumscribing the 2-norm balls.
std::pair<geometry::Zonotope, geometry::Zonotope> scale_bounds(
    double L_s, double L_u, double L_dw, double L_what, double L_psi, double L_v,
    double d_x, double d_u, double d_dw, double d_what, int n_psi, int n);

}  // namespace rkmpc::uncertainty
