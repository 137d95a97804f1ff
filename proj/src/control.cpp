#include "rkmpc/control.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "rkmpc/kernels.hpp"
#include "rkmpc/lifting.hpp"

namespace rkmpc::control {

namespace {

double spectral_radius(const Mat& F) {
  return F.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

std::string to_string(CostMode m) { return m == CostMode::output ? "output" : "lifted"; }

CostMode cost_mode_from_string(const std::string& s) {
  if (s == "output") return CostMode::output;
  if (s == "lifted") return CostMode::lifted;
  throw Error("unknown cost mode: " + s);
}

Mat stage_matrix(const edmd::LiftedModel& model, const DesignOptions& opt) {
  const int np = model.lifted_dim();
  if (opt.mode == CostMode::lifted) {
    require_dims(opt.Q_tilde.rows() == np && opt.Q_tilde.cols() == np,
                 "stage_matrix: Q_tilde must be n_psi x n_psi");
    return opt.Q_tilde;
  }
  require_dims(opt.Q.rows() == model.state_dim(), "stage_matrix: Q must be n x n");
  return model.C.transpose() * opt.Q * model.C + 1e-9 * Mat::Identity(np, np);
}

Mat design_gain(const Mat& A, const Mat& B, const Mat& Q_stage, const Mat& R) {
  const int n = static_cast<int>(A.rows());
  Mat P = Q_stage;
  const int cap = 100000;
  bool converged = false;
  for (int it = 0; it < cap; ++it) {
    const Mat BtPA = B.transpose() * P * A;
    const Mat G = (R + B.transpose() * P * B).ldlt().solve(BtPA);
    const Mat Pn = Q_stage + A.transpose() * P * A - BtPA.transpose() * G;
    const double diff = (Pn - P).norm();
    P = 0.5 * (Pn + Pn.transpose());
    if (diff <= 1e-12 * std::max(1.0, P.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("design_gain: Riccati iteration did not converge; check stabilizability");
  const Mat K = -(R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
  const double rho = spectral_radius(A + B * K);
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "design_gain: closed loop not Schur stable (rho = " << rho
       << "); the pair (A,B) is likely not stabilizable";
    throw NumericalError(os.str());
  }
  return K;
}

Mat solve_terminal_cost(const Mat& F, const Mat& rhs) {
  const int n = static_cast<int>(F.rows());
  require_dims(rhs.rows() == n && rhs.cols() == n, "solve_terminal_cost: size mismatch");
  if (spectral_radius(F) >= 1.0)
    throw NumericalError("solve_terminal_cost: F is not Schur stable");
  // (I - F' (x) F') vec(P) = vec(rhs)
  Mat Ft = F.transpose();
  Mat Kron = Mat::Identity(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      Kron.block(i * n, j * n, n, n) -= Ft(i, j) * Ft;
  Eigen::VectorXd vecP = Kron.partialPivLu().solve(
      Eigen::Map<const Eigen::VectorXd>(rhs.data(), n * n));
  Mat P = Eigen::Map<Mat>(vecP.data(), n, n);
  P = 0.5 * (P + P.transpose()).eval();
  const double res = (F.transpose() * P * F - P + rhs).norm();
  if (res > 1e-8 * std::max(1.0, rhs.norm()))
    throw NumericalError("solve_terminal_cost: Lyapunov residual too large");
  return P;
}

namespace {

// Exact certificate for a zonotope tube T with inequality form (Ah, bh):
// F T (+) W inside T iff h_{FT+W}(a_i) <= b_i on every facet row.
double tube_certificate_slack(const Mat& F, const geometry::Zonotope& W,
                              const geometry::Zonotope& T,
                              const geometry::HPolytope& hrep) {
  const geometry::Zonotope FT_W = geometry::minkowski_sum(geometry::linear_map(F, T), W);
  double slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < hrep.num_rows(); ++i) {
    const Vec a = hrep.A.row(i).transpose();
    slack = std::min(slack, hrep.b(i) - geometry::support(FT_W, a));
  }
  return slack;
}

struct TubeCandidate {
  geometry::Zonotope T;
  geometry::HPolytope hrep;
  std::string kind;
  double slack = -std::numeric_limits<double>::infinity();
};

// minimal RPI axis-aligned box: fixed point r = |F| r + r_W, c = F c + c_W
std::optional<TubeCandidate> tube_axis_box(const Mat& F, const geometry::Zonotope& W) {
  const int n = static_cast<int>(F.rows());
  const Mat Fabs = F.cwiseAbs();
  if (spectral_radius(Fabs) >= 1.0 - 1e-12) return std::nullopt;
  const Vec r = (Mat::Identity(n, n) - Fabs).partialPivLu().solve(W.radii());
  const Vec c = (Mat::Identity(n, n) - F).partialPivLu().solve(W.center);
  if (!(r.array() >= 0).all()) return std::nullopt;
  TubeCandidate cand;
  cand.T = geometry::Zonotope::box(c, r * (1.0 + 1e-9) + Vec::Constant(n, 1e-15));
  cand.hrep = geometry::to_hrep(cand.T);
  cand.kind = "axis_box";
  cand.slack = tube_certificate_slack(F, W, cand.T, cand.hrep);
  return cand;
}

// box in real modal coordinates => parallelotope in the original ones
std::optional<TubeCandidate> tube_modal(const Mat& F, const geometry::Zonotope& W) {
  const int n = static_cast<int>(F.rows());
  if (n > 12) return std::nullopt;
  Eigen::EigenSolver<Mat> es(F);
  if (es.info() != Eigen::Success) return std::nullopt;
  Mat V(n, n), M = Mat::Zero(n, n);
  int col = 0;
  const auto& evals = es.eigenvalues();
  const auto& evecs = es.eigenvectors();
  for (int i = 0; i < n && col < n; ++i) {
    if (std::abs(evals(i).imag()) < 1e-12) {
      V.col(col) = evecs.col(i).real();
      M(col, col) = evals(i).real();
      ++col;
    } else if (evals(i).imag() > 0) {
      if (col + 2 > n) return std::nullopt;
      V.col(col) = evecs.col(i).real();
      V.col(col + 1) = evecs.col(i).imag();
      const double a = evals(i).real(), b = evals(i).imag();
      M(col, col) = a;
      M(col, col + 1) = b;
      M(col + 1, col) = -b;
      M(col + 1, col + 1) = a;
      col += 2;
    }
  }
  if (col != n) return std::nullopt;
  const Mat Mabs = M.cwiseAbs();
  if (spectral_radius(Mabs) >= 1.0 - 1e-12) return std::nullopt;
  Eigen::PartialPivLU<Mat> Vlu(V);
  if (std::abs(Vlu.determinant()) < 1e-12) return std::nullopt;
  const Mat Gt = Vlu.solve(W.generators);
  const Vec rW = Gt.cwiseAbs().rowwise().sum();
  const Vec r = (Mat::Identity(n, n) - Mabs).partialPivLu().solve(rW);
  const Vec c = (Mat::Identity(n, n) - M).partialPivLu().solve(Vlu.solve(W.center));
  if (!(r.array() >= 0).all()) return std::nullopt;
  TubeCandidate cand;
  const Vec rm = r * (1.0 + 1e-9) + Vec::Constant(n, 1e-15);
  cand.T = geometry::Zonotope(V * c, V * Mat(rm.asDiagonal()));
  cand.hrep = geometry::to_hrep(cand.T);
  cand.kind = "modal_parallelotope";
  cand.slack = tube_certificate_slack(F, W, cand.T, cand.hrep);
  return cand;
}

}  // namespace

namespace {

geometry::HPolytope truncated_admissible_set(const Mat& A_cl,
                                             const geometry::HPolytope& C_con,
                                             int T, int row_budget);

// finishes a candidate tube into full designed sets, enforcing the margins;
// returns nullopt when a margin or terminal-set check fails
std::optional<DesignedSets> try_design(const edmd::LiftedModel& model, const Mat& K,
                                       const Mat& F, const geometry::Zonotope& V,
                                       const geometry::HPolytope& X,
                                       const geometry::HPolytope& U,
                                       const TubeCandidate& cand, double margin_X,
                                       double margin_U,
                                       bool truncated_terminal = false) {
  DesignedSets out;
  out.tubes.state_tube = cand.T;
  out.tubes.output_tube =
      geometry::minkowski_sum(geometry::linear_map(model.C, cand.T), V);
  out.tube_hrep = cand.hrep;
  out.tube_kind = cand.kind;
  out.rpi_certificate_slack = cand.slack;

  const geometry::HPolytope X_tight =
      geometry::pontryagin_diff(X, out.tubes.output_tube);
  for (int i = 0; i < X_tight.num_rows(); ++i)
    if (X_tight.b(i) < margin_X * X.b(i)) return std::nullopt;
  out.S = geometry::HPolytope(X_tight.A * model.C, X_tight.b);
  out.U_hat = geometry::pontryagin_diff(U, geometry::linear_map(K, cand.T));
  for (int i = 0; i < out.U_hat.num_rows(); ++i)
    if (out.U_hat.b(i) < margin_U * U.b(i)) return std::nullopt;

  const geometry::HPolytope KU(out.U_hat.A * K, out.U_hat.b);
  try {
    const geometry::HPolytope con = geometry::intersect(out.S, KU);
    out.S_f = truncated_terminal ? truncated_admissible_set(F, con, 80, 200)
                                 : geometry::max_invariant_set(F, con);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (!out.S_f.contains_origin(0.0) || out.S_f.is_empty()) return std::nullopt;
  return out;
}

// T-step constraint-admissibility set for the reachable-horizon route:
// rows A_con A_cl^t x <= b_con for t <= T, keeping only rows an interval
// bound of the current set cannot certify redundant. Cheap (no LPs) and
// bounded in size; exact positive invariance is deliberately left to the
// closed-loop checks on this route.
geometry::HPolytope truncated_admissible_set(const Mat& A_cl,
                                             const geometry::HPolytope& C_con,
                                             int T, int row_budget) {
  const int d = C_con.dim();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> offs;
  for (int i = 0; i < C_con.num_rows(); ++i) {
    rows.emplace_back(C_con.A.row(i));
    offs.push_back(C_con.b(i));
  }
  auto assemble = [&]() {
    Mat A(static_cast<int>(rows.size()), d);
    Vec b(static_cast<int>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      A.row(static_cast<int>(i)) = rows[i];
      b(static_cast<int>(i)) = offs[i];
    }
    return geometry::HPolytope(A, b);
  };
  Vec box_lo(d), box_hi(d);
  bool box_valid = false;
  auto refresh_box = [&]() {
    geometry::HPolytope omega = assemble();
    box_valid = true;
    for (int i = 0; i < d && box_valid; ++i) {
      Vec e = Vec::Zero(d);
      e(i) = 1.0;
      auto hp = geometry::support(omega, e);
      auto hm = geometry::support(omega, -e);
      if (!hp || !hm) {
        box_valid = false;
        return;
      }
      box_hi(i) = *hp;
      box_lo(i) = -*hm;
    }
  };
  auto box_max = [&](const Eigen::RowVectorXd& a) {
    double v = 0.0;
    for (int j = 0; j < d; ++j) v += a(j) > 0 ? a(j) * box_hi(j) : a(j) * box_lo(j);
    return v;
  };

  refresh_box();
  Mat At = A_cl;
  for (int t = 1; t <= T; ++t) {
    const Mat cand = C_con.A * At;
    bool added = false;
    for (int i = 0; i < cand.rows(); ++i) {
      Eigen::RowVectorXd a = cand.row(i);
      if (a.norm() < 1e-13) continue;
      if (box_valid && box_max(a) <= C_con.b(i) + 1e-10 * (1.0 + std::abs(C_con.b(i))))
        continue;
      rows.emplace_back(a);
      offs.push_back(C_con.b(i));
      added = true;
      if (static_cast<int>(rows.size()) >= row_budget) return assemble();
    }
    if (added) refresh_box();
    At = A_cl * At;
  }
  return assemble();
}

}  // namespace

DesignedSets design_sets(const edmd::LiftedModel& model, const Mat& K,
                         const geometry::Zonotope& W_bar, const geometry::Zonotope& V,
                         const geometry::HPolytope& X, const geometry::HPolytope& U,
                         double rpi_alpha_max, int rpi_k_max, double margin_X,
                         double margin_U, int reach_cap) {
  const Mat F = model.A + model.B * K;
  if (spectral_radius(F) >= 1.0)
    throw AssumptionError("design_sets: A + BK is not Schur stable");
  const int np = model.lifted_dim();

  // route 1: tubes with an exact invariance certificate
  std::vector<TubeCandidate> certified;
  if (auto cand = tube_axis_box(F, W_bar); cand && cand->slack >= 0.0)
    certified.push_back(*cand);
  if (auto cand = tube_modal(F, W_bar); cand && cand->slack >= 0.0)
    certified.push_back(*cand);
  if (certified.empty()) {
    try {
      const geometry::Zonotope Zsum =
          geometry::rpi_set(F, W_bar, rpi_alpha_max, rpi_k_max);
      const int max_order = std::max(1, 12 / np);
      for (int order = max_order; order >= 1 && certified.empty(); --order) {
        for (double scale : {1.0, 1.01, 1.05, 1.1, 1.25}) {
          geometry::Zonotope T = geometry::reduce_order(Zsum, order).scaled(scale);
          if (T.num_generators() > 12) continue;
          TubeCandidate cand;
          cand.T = T;
          cand.hrep = geometry::to_hrep(T);
          cand.kind = "rpi_reduced_order";
          cand.slack = tube_certificate_slack(F, W_bar, T, cand.hrep);
          if (cand.slack >= 0.0) {
            certified.push_back(cand);
            break;
          }
        }
      }
    } catch (const NumericalError&) {
      // truncated sum unavailable (contraction too slow); fall through
    }
  }
  for (const auto& cand : certified) {
    if (auto out = try_design(model, K, F, V, X, U, cand, margin_X, margin_U))
      return *out;
  }

  // route 2: finite-horizon error reachable set (+)_{i<k} F^i W_bar; the
  // weaker containment Z_s in F Z_s (+) W_bar holds by monotonicity of the
  // reachable sets, and invariance is left to the closed-loop checks.
  // Margin screening is cheap (support arithmetic); the terminal-set
  // computation runs once per surviving candidate, largest horizon first.
  const int max_order = std::max(1, 12 / np);
  auto margins_ok = [&](const geometry::Zonotope& T) {
    const geometry::Zonotope Zx =
        geometry::minkowski_sum(geometry::linear_map(model.C, T), V);
    const geometry::HPolytope X_tight = geometry::pontryagin_diff(X, Zx);
    for (int i = 0; i < X_tight.num_rows(); ++i)
      if (X_tight.b(i) < margin_X * X.b(i)) return false;
    const geometry::HPolytope Uh =
        geometry::pontryagin_diff(U, geometry::linear_map(K, T));
    for (int i = 0; i < Uh.num_rows(); ++i)
      if (Uh.b(i) < margin_U * U.b(i)) return false;
    return true;
  };
  std::vector<geometry::Zonotope> tubes;
  {
    geometry::Zonotope reach = W_bar;
    Mat Fi = F;
    for (int k = 1; k <= reach_cap; ++k) {
      geometry::Zonotope T = geometry::reduce_order(reach, max_order);
      if (T.num_generators() <= 12) {
        if (!margins_ok(T)) {
          if (!tubes.empty()) break;  // margins only shrink from here on
        } else {
          tubes.push_back(T);
        }
      }
      reach = geometry::minkowski_sum(reach, geometry::linear_map(Fi, W_bar));
      Fi = F * Fi;
    }
  }
  for (auto it = tubes.rbegin(); it != tubes.rend(); ++it) {
    TubeCandidate cand;
    cand.T = *it;
    cand.hrep = geometry::to_hrep(*it);
    cand.kind = "reachable_horizon_" +
                std::to_string(static_cast<int>(tubes.rend() - it));
    cand.slack = tube_certificate_slack(F, W_bar, *it, cand.hrep);
    if (auto out = try_design(model, K, F, V, X, U, cand, margin_X, margin_U,
                              /*truncated_terminal=*/true))
      return *out;
  }
  throw AssumptionError(
      "design_sets: even the one-step error tube empties a tightened constraint "
      "(non-empty tightened constraint sets required); use more data or a richer "
      "observable dictionary so the uncertainty sets shrink");
}

TubeController design_controller(const edmd::LiftedModel& model,
                                 const geometry::Zonotope& W_bar,
                                 const geometry::Zonotope& V,
                                 const geometry::HPolytope& X,
                                 const geometry::HPolytope& U,
                                 const DesignOptions& options) {
  TubeController ctrl;
  ctrl.model = model;
  ctrl.options = options;
  const Mat Qs = stage_matrix(model, options);
  ctrl.K = design_gain(model.A, model.B, Qs, options.R);
  const Mat F = model.A + model.B * ctrl.K;
  const Mat rhs = Qs + ctrl.K.transpose() * options.R * ctrl.K;
  ctrl.P = solve_terminal_cost(F, rhs);
  ctrl.lyapunov_residual = (F.transpose() * ctrl.P * F - ctrl.P + rhs).norm();
  ctrl.sets = design_sets(model, ctrl.K, W_bar, V, X, U, options.rpi_alpha_max,
                          options.rpi_k_max, options.margin_X, options.margin_U,
                          options.reach_cap);
  ctrl.condensed = qp::condense(model.A, model.B, options.N, Qs, options.R, ctrl.P,
                                ctrl.sets.S, ctrl.sets.U_hat, ctrl.sets.S_f,
                                ctrl.sets.tube_hrep);
  ctrl.solver = std::make_shared<qp::AdmmSolver>(ctrl.condensed.H, ctrl.condensed.A_in,
                                                 options.qp);
  if (model.lipschitz) ctrl.rho_E = theorem3_rho(model, ctrl.K);
  return ctrl;
}

StepResult step(TubeController& ctrl, const Vec& x) {
  require(x.allFinite(), "step: non-finite state");
  const Vec s = lifting::lift(ctrl.model.dictionary, x);
  const Vec b = ctrl.condensed.b_for(s);
  const Vec f = Vec::Zero(ctrl.condensed.num_vars());
  qp::QpSolution sol =
      ctrl.solver->solve(f, b, ctrl.warm_z ? &*ctrl.warm_z : nullptr,
                         ctrl.warm_dual ? &*ctrl.warm_dual : nullptr);
  if (sol.status == qp::QpStatus::infeasible) {
    if (ctrl.step_count == 0)
      throw InfeasibilityError(
          "step: QP infeasible at k = 0; the initial condition is outside the "
          "region of attraction");
    throw InfeasibilityError("step: QP infeasible at k = " +
                             std::to_string(ctrl.step_count) +
                             "; recursive feasibility violated");
  }
  if (sol.status == qp::QpStatus::max_iter)
    throw NumericalError("step: QP solver hit max_iter without convergence");

  const int ns = ctrl.condensed.n_s;
  const int nu = ctrl.condensed.n_u;
  const int N = ctrl.condensed.N;
  StepResult r;
  r.s = s;
  r.s_hat = sol.z.head(ns);
  r.u_hat = sol.z.segment(ns, nu);
  r.u = r.u_hat + ctrl.K * (s - r.s_hat);
  r.predicted = ctrl.condensed.trajectory(sol.z);
  r.qp_status = sol.status;
  r.optimal_cost = sol.objective;
  r.qp_iterations = sol.iterations;
  const Mat Qs = stage_matrix(ctrl.model, ctrl.options);
  r.nominal_stage = r.s_hat.dot(Qs * r.s_hat) + r.u_hat.dot(ctrl.options.R * r.u_hat);
  r.tube_ok = geometry::contains(ctrl.sets.tubes.output_tube,
                                 Vec(x - ctrl.model.C * r.s_hat), 1e-7);

  // shifted warm start with the terminal controller appended
  Vec wz(ctrl.condensed.num_vars());
  wz.head(ns) = ctrl.model.A * r.s_hat + ctrl.model.B * r.u_hat;
  for (int j = 0; j + 1 < N; ++j)
    wz.segment(ns + j * nu, nu) = sol.z.segment(ns + (j + 1) * nu, nu);
  wz.segment(ns + (N - 1) * nu, nu) = ctrl.K * r.predicted.col(N);
  ctrl.warm_z = wz;
  ctrl.warm_dual = sol.lambda;
  ++ctrl.step_count;
  return r;
}

KmpcController design_kmpc(const edmd::LiftedModel& model, int N, const Mat& Q,
                           const Mat& R, const Mat& Q_N, const geometry::HPolytope& X,
                           const geometry::HPolytope& U, qp::QpSettings qp_settings) {
  const int ns = model.lifted_dim();
  const int nu = model.input_dim();
  require(N >= 1, "design_kmpc: horizon must be >= 1");
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (R + R.transpose()));
    require(es.eigenvalues().minCoeff() > 0.0, "design_kmpc: R must be positive definite");
  }
  KmpcController c;
  c.model = model;
  c.N = N;
  c.Q = Q;
  c.R = R;
  c.Q_N = Q_N;
  c.qp = qp_settings;

  // s_hat_{k+i} = A^i s_k + G_i u; decision variable is the stacked u only
  std::vector<Mat> Apow(N + 1);
  Apow[0] = Mat::Identity(ns, ns);
  for (int i = 1; i <= N; ++i) Apow[i] = model.A * Apow[i - 1];
  std::vector<Mat> G(N + 1);
  for (int i = 0; i <= N; ++i) {
    G[i] = Mat::Zero(ns, N * nu);
    for (int j = 0; j < i; ++j) G[i].block(0, j * nu, ns, nu) = Apow[i - 1 - j] * model.B;
  }

  const Mat Qbar = model.C.transpose() * Q * model.C;
  const Mat QbarN = model.C.transpose() * Q_N * model.C;
  Mat M = Mat::Zero(N * nu, N * nu);
  Mat fmap = Mat::Zero(N * nu, ns);
  for (int i = 1; i < N; ++i) {
    M.noalias() += G[i].transpose() * Qbar * G[i];
    fmap.noalias() += G[i].transpose() * Qbar * Apow[i];
  }
  M.noalias() += G[N].transpose() * QbarN * G[N];
  fmap.noalias() += G[N].transpose() * QbarN * Apow[N];
  for (int j = 0; j < N; ++j) M.block(j * nu, j * nu, nu, nu) += R;
  c.H = M + M.transpose();
  c.f_map = 2.0 * fmap;

  // constraints: C s_hat_{k+i} in X for i = 1..N, u_{k+i} in U for i = 0..N-1
  const int rows_X = X.num_rows() * N;
  const int rows_U = U.num_rows() * N;
  c.A_in = Mat::Zero(rows_X + rows_U, N * nu);
  c.b_const = Vec::Zero(rows_X + rows_U);
  c.b_map = Mat::Zero(rows_X + rows_U, ns);
  int r = 0;
  for (int i = 1; i <= N; ++i) {
    c.A_in.middleRows(r, X.num_rows()) = X.A * model.C * G[i];
    c.b_const.segment(r, X.num_rows()) = X.b;
    c.b_map.middleRows(r, X.num_rows()) = X.A * model.C * Apow[i];
    r += X.num_rows();
  }
  for (int j = 0; j < N; ++j) {
    c.A_in.block(r, j * nu, U.num_rows(), nu) = U.A;
    c.b_const.segment(r, U.num_rows()) = U.b;
    r += U.num_rows();
  }
  c.solver = std::make_shared<qp::AdmmSolver>(c.H, c.A_in, qp_settings);
  return c;
}

KmpcStepResult kmpc_step(KmpcController& ctrl, const Vec& x) {
  const Vec s = lifting::lift(ctrl.model.dictionary, x);
  const Vec f = ctrl.f_map * s;
  const Vec b = ctrl.b_const - ctrl.b_map * s;
  qp::QpSolution sol =
      ctrl.solver->solve(f, b, ctrl.warm_z ? &*ctrl.warm_z : nullptr,
                         ctrl.warm_dual ? &*ctrl.warm_dual : nullptr);
  KmpcStepResult r;
  r.qp_status = sol.status;
  r.feasible = sol.status == qp::QpStatus::optimal;
  const int nu = ctrl.model.input_dim();
  if (r.feasible) {
    r.u = sol.z.head(nu);
    // shifted warm start
    Vec wz = Vec::Zero(ctrl.N * nu);
    for (int j = 0; j + 1 < ctrl.N; ++j)
      wz.segment(j * nu, nu) = sol.z.segment((j + 1) * nu, nu);
    ctrl.warm_z = wz;
    ctrl.warm_dual = sol.lambda;
  } else {
    r.u = Vec::Zero(nu);  // the baseline has no feasibility guarantee
    ctrl.warm_z.reset();
    ctrl.warm_dual.reset();
  }
  ++ctrl.step_count;
  return r;
}

double theorem3_rho(const edmd::LiftedModel& model, const Mat& K) {
  require(model.lipschitz.has_value(), "theorem3_rho: model has no Lipschitz estimates");
  const Mat F = model.A + model.B * K;
  const int n = static_cast<int>(F.rows());
  const Mat S = (Mat::Identity(n, n) - F).partialPivLu().solve(Mat::Identity(n, n));
  const double norm_sum = S.jacobiSvd().singularValues()(0);
  const Mat E = (model.lipschitz->L_s * Mat::Identity(n, n) +
                 model.lipschitz->L_u * K.transpose() * K) *
                norm_sum;
  return spectral_radius(E);
}

}  // namespace rkmpc::control
