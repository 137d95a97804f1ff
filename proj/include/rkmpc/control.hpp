#pragma once

#include <optional>
#include <string>

#include "rkmpc/edmd.hpp"
#include "rkmpc/geometry.hpp"
#include "rkmpc/qp.hpp"
#include "rkmpc/types.hpp"

namespace rkmpc::control {

/// Stage-cost mode: penalize the reconstructed output ||C s||_Q or the lifted
/// state ||s||_Qtilde directly.
enum class CostMode { output, lifted };

std::string to_string(CostMode m);
CostMode cost_mode_from_string(const std::string& s);

struct DesignOptions {
  CostMode mode = CostMode::lifted;
  Mat Q;        // n x n; used in output mode and for reported trajectory costs
  Mat Q_tilde;  // n_psi x n_psi; used in lifted mode
  Mat R;        // m x m, positive definite
  int N = 10;
  double rpi_alpha_max = 0.05;
  int rpi_k_max = 200;
  // tube admissibility margins: after tightening, every state (input) offset
  // must keep at least this fraction of its original value
  double margin_X = 0.7;
  double margin_U = 0.5;
  int reach_cap = 60;  // largest horizon for the reachable-tube fallback
  qp::QpSettings qp;
};

/// Stage weight on the lifted state: Q_tilde, or C'QC (+ small ridge) in
/// output mode so the same matrix drives the gain, the Lyapunov equation and
/// the MPC cost.
Mat stage_matrix(const edmd::LiftedModel& model, const DesignOptions& opt);

/// Infinite-horizon discrete LQR gain via Riccati fixed-point iteration.
/// Convention u = +K e with F = A + BK Schur stable.
Mat design_gain(const Mat& A, const Mat& B, const Mat& Q_stage, const Mat& R);

/// Discrete Lyapunov equation F'PF - P = -rhs via the vectorized linear system.
Mat solve_terminal_cost(const Mat& F, const Mat& rhs);

struct DesignedSets {
  geometry::SetPair tubes;       // Z_s (lifted) and Z_x = C Z_s (+) V
  geometry::HPolytope S;         // tightened lifted-state constraint
  geometry::HPolytope U_hat;     // tightened input constraint
  geometry::HPolytope S_f;       // terminal set
  geometry::HPolytope tube_hrep; // inequality form of Z_s used by Eq. 17c-type rows
  std::string tube_kind;         // which tube realization was used
  double rpi_certificate_slack = 0.0;  // min facet slack of F Zs (+) W inside Zs;
                                       // negative for the reachable-horizon tube
};

/// Offline set design. Prefers a tube with an exact robust-invariance
/// certificate (minimal RPI box, modal parallelotope, or reduced truncated
/// sum). When no certified tube keeps the tightened constraints above the
/// configured margins — the case for lifted models whose kernel-observable
/// modes sit near the unit circle — it falls back to the finite-horizon error
/// reachable set (+)_{i<k} F^i W_bar with the largest admissible k; that set
/// satisfies the weaker containment Z_s inside F Z_s (+) W_bar and leaves the
/// invariance properties to the closed-loop checks. Throws AssumptionError
/// when even the one-step tube empties a constraint.
DesignedSets design_sets(const edmd::LiftedModel& model, const Mat& K,
                         const geometry::Zonotope& W_bar, const geometry::Zonotope& V,
                         const geometry::HPolytope& X, const geometry::HPolytope& U,
                         double rpi_alpha_max = 0.05, int rpi_k_max = 200,
                         double margin_X = 0.7, double margin_U = 0.5,
                         int reach_cap = 60);

struct TubeController {
  edmd::LiftedModel model;
  Mat K, P;
  DesignedSets sets;
  DesignOptions options;
  qp::CondensedMpc condensed;
  std::shared_ptr<qp::AdmmSolver> solver;
  double lyapunov_residual = 0.0;
  double rho_E = std::numeric_limits<double>::quiet_NaN();  // Theorem-3 gate
  // online state
  int step_count = 0;
  std::optional<Vec> warm_z;
  std::optional<Vec> warm_dual;
};

TubeController design_controller(const edmd::LiftedModel& model,
                                 const geometry::Zonotope& W_bar,
                                 const geometry::Zonotope& V,
                                 const geometry::HPolytope& X,
                                 const geometry::HPolytope& U,
                                 const DesignOptions& options);

struct StepResult {
  Vec u;           // applied control u = u_hat* + K (s - s_hat*)
  Vec u_hat;       // first nominal input
  Vec s_hat;       // optimal nominal lifted state
  Vec s;           // measured lifted state
  Mat predicted;   // nominal trajectory s_hat_{k..k+N}
  qp::QpStatus qp_status = qp::QpStatus::max_iter;
  double optimal_cost = 0.0;    // V* at the optimizer
  double nominal_stage = 0.0;   // ||s_hat||^2_Qstage (or ||C s_hat||^2_Q) + ||u_hat||^2_R
  bool tube_ok = false;         // x in C s_hat (+) Z_x
  int qp_iterations = 0;
};

/// One Algorithm-1 online step. Throws InfeasibilityError (initial condition
/// outside the region of attraction at k = 0; recursive-feasibility violation
/// afterwards).
StepResult step(TubeController& ctrl, const Vec& x);

/// Baseline lifted MPC with no tube, no tightening and a terminal weight on
/// the reconstructed output; infeasibility yields zero control by design.
struct KmpcController {
  edmd::LiftedModel model;
  int N = 10;
  Mat Q, R, Q_N;
  Mat H;               // over u block only
  Mat f_map;           // f = f_map * s_k
  Mat A_in;            // constraint rows on u
  Mat b_map;           // b = b_const - b_map * s_k
  Vec b_const;
  std::shared_ptr<qp::AdmmSolver> solver;
  qp::QpSettings qp;
  int step_count = 0;
  std::optional<Vec> warm_z, warm_dual;
};

KmpcController design_kmpc(const edmd::LiftedModel& model, int N, const Mat& Q,
                           const Mat& R, const Mat& Q_N, const geometry::HPolytope& X,
                           const geometry::HPolytope& U, qp::QpSettings qp = {});

struct KmpcStepResult {
  Vec u;
  qp::QpStatus qp_status = qp::QpStatus::max_iter;
  bool feasible = false;
};

KmpcStepResult kmpc_step(KmpcController& ctrl, const Vec& x);

/// rho((L_s I + L_u K'K) ||(I - F)^-1||), the point-wise convergence gate.
double theorem3_rho(const edmd::LiftedModel& model, const Mat& K);

}  // namespace rkmpc::control
